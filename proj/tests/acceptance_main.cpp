#include "emq/acceptance.hpp"

#include <cstdio>

int main() {
    auto results = emq::run_acceptance();
    std::fputs(emq::acceptance_lines(results).c_str(), stdout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.passed) ++failed;
    return failed;
}
