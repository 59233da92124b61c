#pragma once

#include <string>
#include <vector>

namespace masklab {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// flip_bernoulli_polarity inverts Bernoulli draws inside the masks suite
// only; it exists so a deliberate fault provably fails that suite while
// leaving the others untouched.
struct VerifyOptions {
    bool flip_bernoulli_polarity = false;
};

// suite: masks | gradients | penalty | stats | all.
std::vector<VerifyCheck> verify_suite(const std::string& suite,
                                      const VerifyOptions& opts = {});

bool all_passed(const std::vector<VerifyCheck>& checks);

} // namespace masklab
