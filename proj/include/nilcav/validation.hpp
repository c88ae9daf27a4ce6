#pragma once

// Cross-validation suite: every closed form checked against the dense
// oracle, plus the documented-discrepancy rows (formula variants that the
// first-principles computation contradicts are reported, not hidden).
// Emitted as a machine-readable CSV of (check, value, tolerance, status).

#include <string>
#include <vector>

namespace nilcav {

struct ValidationRow {
    std::string check;
    double value = 0.0;
    double tolerance = 0.0;  // NaN for informational rows
    std::string status;      // "pass" | "fail" | "info"
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    bool all_passed() const;
};

struct ValidationOptions {
    unsigned long long seed = 1;
};

ValidationReport run_validation(const ValidationOptions& options = {});

std::string validation_csv(const ValidationReport& report);

}  // namespace nilcav
