#pragma once

#include "run.hpp"

namespace khintchine::cli {

void cmd_gen_seq(Run& run);
void cmd_check_seq(Run& run);
void cmd_gcd_sum(Run& run);
void cmd_count(Run& run);
void cmd_measure(Run& run);
void cmd_appendix_c(Run& run);
void cmd_littlewood(Run& run);

}  // namespace khintchine::cli
