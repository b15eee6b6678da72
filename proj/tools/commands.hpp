#pragma once

#include "config.hpp"
#include "csv.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kmx::tools {

// Settings shared by the single-quote subcommands. Model parameters and the
// contract (S, K, tau) come from the config; missing keys take the defaults
// of the model's reference parameter set.
struct QuoteRequest {
    std::string model;   // heston | cev | sz | commodity | bs
    std::string method;  // km | ft | mc | closed
    int order = -1;      // -1: model default
    std::uint64_t seed = 20240611;
    int threads = 0;
    Config settings;
};

struct CommandOutput {
    Table table;
    std::vector<std::pair<std::string, std::string>> meta;
};

CommandOutput price_command(const QuoteRequest& q);
CommandOutput greeks_command(const QuoteRequest& q);
CommandOutput mc_command(const QuoteRequest& q);
CommandOutput diagnose_command(const QuoteRequest& q);
// dump: include the serialised corrective terms.
CommandOutput expand_command(const QuoteRequest& q, bool dump);

}  // namespace kmx::tools
