#include "rbl/errors.hpp"

#include "text.hpp"

namespace rbl {

UndefinedTimeError::UndefinedTimeError(double t, double start)
    : Error("time " + text::exact(t) + " precedes timeline start " + text::exact(start)),
      time_(t) {}

MissingCellError::MissingCellError(std::string key)
    : Error("missing cell " + key), key_(std::move(key)) {}

}  // namespace rbl
