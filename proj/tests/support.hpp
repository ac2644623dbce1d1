#pragma once

#include <string>

#include "rollhls/parser.hpp"

inline std::string fixture(const std::string &name) { return std::string(FIXTURE_DIR) + "/" + name; }

inline rollhls::Kernel load_fixture(const std::string &name) { return rollhls::load_kernel_file(fixture(name)).kernel; }

inline const char *const kFiatKernels[] = {"mac8.slc", "add4.slc", "csub4.slc", "mul2.slc", "shr8.slc"};
