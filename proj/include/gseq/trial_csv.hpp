#ifndef GSEQ_TRIAL_CSV_HPP
#define GSEQ_TRIAL_CSV_HPP

#include <iosfwd>
#include <string>

#include "gseq/stats.hpp"

namespace gseq {

// Reads long-format trial data: header "stage,arm,value", then one row per
// observation with stage a 1-based integer, arm "treatment" or "control", and
// a finite value. Stages must be contiguous from 1. Errors carry the
// offending line number. Row order within a (stage, arm) cell is preserved.
TrialData read_trial_csv(std::istream& in);
TrialData read_trial_csv_file(const std::string& path);

// Inverse of read_trial_csv: stages ascending, treatment rows before control
// rows, values at full precision. Round-trips exactly.
std::string write_trial_csv(const TrialData& data);

}  // namespace gseq

#endif
