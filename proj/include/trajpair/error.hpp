#pragma once

#include <stdexcept>
#include <string>

namespace trajpair {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MeshError : Error {
  using Error::Error;
};

struct ObjParseError : Error {
  using Error::Error;
};

struct ImageIoError : Error {
  using Error::Error;
};

struct PlacementError : Error {
  using Error::Error;
};

struct SimulationDiverged : Error {
  using Error::Error;
};

struct RankingError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace trajpair
