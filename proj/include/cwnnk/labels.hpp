#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cwnnk {

using ClassId = std::uint16_t;

struct LabelSet {
  std::vector<ClassId> labels;
  std::size_t num_classes = 2;

  std::size_t size() const noexcept { return labels.size(); }
  ClassId operator[](std::size_t i) const { return labels[i]; }

  // Throws InputError if num_classes < 2 or a label is out of range.
  // Returns the classes that never occur (callers may warn on them).
  std::vector<ClassId> validate() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

}  // namespace cwnnk
