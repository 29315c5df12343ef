#include "leakhound/split.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "leakhound/errors.hpp"

namespace leakhound {

SplitResult split_by_domain(const std::vector<LabeledFlow>& flows, double test_fraction,
                            std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie strictly between 0 and 1");
    std::vector<std::string> domains;  // first-occurrence order
    std::unordered_map<std::string, std::size_t> flows_per_domain;
    for (const auto& lf : flows) {
        if (!flows_per_domain.count(lf.flow.domain)) domains.push_back(lf.flow.domain);
        ++flows_per_domain[lf.flow.domain];
    }
    if (domains.size() < 2)
        throw ConfigError("need at least two distinct domains to split");

    std::mt19937_64 rng(seed);
    std::shuffle(domains.begin(), domains.end(), rng);

    const auto want = static_cast<std::size_t>(test_fraction * static_cast<double>(flows.size()));
    std::unordered_set<std::string> test_domains;
    std::size_t test_rows = 0;
    for (const auto& dom : domains) {
        if (test_rows >= want && !test_domains.empty()) break;
        if (test_domains.size() + 1 == domains.size()) break;  // keep one for training
        test_domains.insert(dom);
        test_rows += flows_per_domain[dom];
    }
    if (test_domains.empty()) test_domains.insert(domains.front());

    SplitResult out;
    for (const auto& lf : flows)
        (test_domains.count(lf.flow.domain) ? out.test : out.train).push_back(lf);
    return out;
}

void check_domain_disjoint(const std::vector<LabeledFlow>& train,
                           const std::vector<LabeledFlow>& test) {
    std::unordered_set<std::string> train_domains;
    for (const auto& lf : train) train_domains.insert(lf.flow.domain);
    for (const auto& lf : test)
        if (train_domains.count(lf.flow.domain))
            throw ConfigError("domain appears in both train and test: " + lf.flow.domain);
}

}  // namespace leakhound
