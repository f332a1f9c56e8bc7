// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vlbal {

/// Runs the command line. `args` excludes the program name. Errors are
/// written to `err` as "error[E_CODE]: message"; the return value is the
/// process exit code (0 on success).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses byte sizes such as "80G", "512M", "1.5K" or "1e9" (decimal units).
double parse_byte_size(std::string_view text);

} // namespace vlbal
