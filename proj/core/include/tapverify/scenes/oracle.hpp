#pragma once

#include <string_view>

#include "tapverify/scenes/prompt.hpp"
#include "tapverify/scenes/scene.hpp"

namespace tapverify::scenes {

enum class Label : std::uint8_t { kNo = 0, kYes = 1 };

std::string_view label_name(Label label);

// Exact rule check of a scene against its prompt:
//   single_object  at least one object of the kind
//   two_object     both kinds present
//   counting       exactly `count` objects of the kind
//   colors         kind present and every object of that kind has the colour
//   position       some A/B pair satisfies the relation
//   color_attr     A with colour A and B with colour B both present
// Throws InvalidArgument for a malformed prompt or scene.
Label oracle_check(const Prompt& prompt, const Scene& scene);

}  // namespace tapverify::scenes
