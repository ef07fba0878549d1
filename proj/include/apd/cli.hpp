#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apd {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Exit statuses of the `apd` command.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitInternal = 2 };

/// Entry point of the `apd` tool. `args` excludes the program name.
///
///   apd decode  --model M [--small-model S] [--decoder ar|semi:k|oneshot|apd] ...
///   apd verify  <suite|all>
///   apd sweep   [--model M] [--decoder list] [--R list] [--W list] [--M list] ...
///   apd mi-gap  --model M
///
/// Output files carry a run manifest; when SOURCE_DATE_EPOCH is set it is
/// used as the manifest timestamp so reruns are byte-identical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apd
