#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>

#include "tapverify/scenes/prompt.hpp"
#include "tapverify/scenes/scene.hpp"

namespace tapverify::scale {

struct Outcome {
  scenes::Prompt prompt;
  scenes::Scene final_scene;
};

// Categories without outcomes are absent from the maps.
struct AccuracyTable {
  std::map<scenes::Category, double> per_category;
  std::map<scenes::Category, std::size_t> counts;
  std::optional<double> overall;  // unweighted mean over present categories

  std::optional<double> category(scenes::Category c) const;
};

AccuracyTable task_accuracy(std::span<const Outcome> outcomes);

}  // namespace tapverify::scale
