#pragma once

// Persisted artifacts: draws, Q-matrices, diagnostics and decision tables.
// All numbers are written with 17 significant digits so reloading is exact.

#include <iosfwd>
#include <string>
#include <vector>

#include "povmap/decide.hpp"
#include "povmap/diagnostics.hpp"
#include "povmap/fgt.hpp"
#include "povmap/sampler.hpp"

namespace povmap {

// Long format `chain,iter,param,value`; chain is 0-based, iter is the 1-based
// retained index.
void write_draws(std::ostream& out, const DrawsStore& draws, const ModelData& data);
DrawsStore read_draws(std::istream& in, const ModelData& data);

// `comuna_id,draw_0001,...,draw_R`.
void write_q_matrix(std::ostream& out, const QMatrix& q);
QMatrix read_q_matrix(std::istream& in, double alpha);

void write_psrf(std::ostream& out, const std::vector<PsrfEntry>& entries);

// `comuna_id,posterior_mean,posterior_sd,direct_estimate`, table order.
void write_point(std::ostream& out, const DecisionReport& report, const std::vector<double>& direct);

// `comuna_id,p_gt_t1..p_gt_tn,flag_t1..flag_tn`, table order, flags as 0/1.
void write_flags(std::ostream& out, const DecisionReport& report);

// `comuna_id,prob_max,prob_min`, by descending prob_max then ascending prob_min.
void write_extremes(std::ostream& out, const DecisionReport& report);

// "0", "1", "0.5": the alpha tag used in artifact file names.
std::string alpha_tag(double alpha);

}  // namespace povmap
