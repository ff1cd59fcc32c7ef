#pragma once

#include <stdexcept>
#include <string>

namespace sic {

// All toolkit errors derive from Error so callers can catch the family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputShapeError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct EpisodeFinishedError : Error {
  using Error::Error;
};
struct PlacementError : Error {
  using Error::Error;
};
struct ActionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ModeError : Error {
  using Error::Error;
};
struct NotReadyError : Error {
  using Error::Error;
};
struct DistributionError : Error {
  using Error::Error;
};
struct CheckpointError : Error {
  using Error::Error;
};

}  // namespace sic
