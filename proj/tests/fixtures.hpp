#pragma once

#include <string>

#include "factrel/core.hpp"

inline std::string fixture_path(const std::string& name) { return std::string(FACTREL_TEST_DATA) + "/" + name; }
inline std::string fixture(const std::string& name) { return factrel::read_file(fixture_path(name)); }
