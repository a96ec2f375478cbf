#pragma once

#include <stdexcept>

namespace finelogic {

/// A metric was asked for over zero items.
class EmptyCohort : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace finelogic
