#pragma once

#include <string>

namespace loxolab {

/// Path of the metadata file written next to a combing: "x.json" -> "x.meta.json".
std::string sidecar_path(const std::string& combing_path);

/// Subcommands build, verify, analyze and run. Returns 0 on success, 1 on a
/// validation failure and 2 on a usage or configuration error.
int cli_main(int argc, char** argv);

}  // namespace loxolab
