#pragma once

#include <string>
#include <vector>

namespace sisapprox {

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;  // first violation, or a summary when passed
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool passed() const {
        for (const auto& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }
    void add(std::string name, bool passed, std::string detail = {}) {
        checks.push_back({std::move(name), passed, std::move(detail)});
    }
    void append(const VerificationReport& other) {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    }
    std::string to_text() const {
        std::string out;
        for (const auto& c : checks) {
            out += (c.passed ? "PASS " : "FAIL ") + c.name;
            if (!c.detail.empty()) out += ": " + c.detail;
            out += '\n';
        }
        return out;
    }
};

}  // namespace sisapprox
