#pragma once

#include <string>
#include <vector>

namespace deeprotor {

// Command dispatch behind the deeprotor binary; args exclude the program
// name.  Returns the process exit code; errors are reported on stderr.
//
// Subcommands:
//   train --config <file> --out <dir> [--resume <ckpt>] [--seed N] [--episodes N]
//   eval --model <ckpt> --out <dir> [--arena <src>] [--episodes N] [--seed N]
//   render-depth --arena <src> --out <pgm> [--pose x,y,z,yaw] [--width N]
//                [--height N] [--hfov D] [--max-range M]
//   plot --metrics <csv> --out <dir>
//
// The environment variable DEEPROTOR_SEED overrides the config seed; an
// explicit --seed flag wins over both.
int run_cli(const std::vector<std::string>& args);

}  // namespace deeprotor
