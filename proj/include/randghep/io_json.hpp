#pragma once

// JSON views of the result types (nlohmann::json). NaN fields serialize as null.

#include "randghep/kle.hpp"

#include <json.hpp>

namespace randghep {

inline nlohmann::json vector_to_json(const VectorRef& v)
{
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

inline nlohmann::json to_json(const MatvecCounts& c)
{
    return {{"a_applies", c.a_applies},
            {"b_applies", c.b_applies},
            {"b_solves", c.b_solves},
            {"reorth_b_applies", c.reorth_b_applies},
            {"reorth_b_solves", c.reorth_b_solves},
            {"c_applies", c.c_applies},
            {"probe_a_applies", c.probe_a_applies}};
}

inline nlohmann::json to_json(const GhepDiagnostics& d)
{
    return {{"sketch_columns", d.sketch_columns},
            {"effective_rank", d.effective_rank},
            {"direct_c", d.direct_c},
            {"symmetry_defect", d.symmetry_defect},
            {"sigma_min_F", d.sigma_min_F},
            {"sigma_max_F", d.sigma_max_F},
            {"sigma_max_Omega", d.sigma_max_Omega},
            {"cholesky_fallback", d.cholesky_fallback},
            {"dropped_dims", d.dropped_dims}};
}

inline nlohmann::json to_json(const GhepSolution& s)
{
    return {{"method", std::string(to_string(s.method))},
            {"k", s.k},
            {"p", s.p},
            {"seed", s.seed},
            {"eigenvalues", vector_to_json(s.lambda)},
            {"counts", to_json(s.counts)},
            {"diagnostics", to_json(s.diagnostics)}};
}

inline nlohmann::json to_json(const ErrorEstimate& e)
{
    return {{"e", e.e},
            {"alpha", e.alpha},
            {"r", e.r_probes},
            {"probability_floor", e.probability_floor},
            {"binv_norm_used", e.binv_norm_used},
            {"binv_source", std::string(to_string(e.source))},
            {"max_probe_b_norm", e.max_probe_b_norm}};
}

inline nlohmann::json to_json(const QrMetrics& m)
{
    return {{"residual", m.residual}, {"orthogonality", m.orthogonality}, {"projection", m.projection},
            {"inverse", m.inverse}};
}

inline nlohmann::json to_json(const TruncationReport& r)
{
    return {{"expected_sq_error", r.expected_sq_error},
            {"lhs_sum", r.lhs_sum},
            {"lambda_sum", r.lambda_sum},
            {"vector_sum", r.vector_sum},
            {"angle_sum", r.angle_sum},
            {"epsilon", r.epsilon},
            {"bound_literal", r.bound_literal},
            {"bound_summed", r.bound_summed},
            {"worst_term_slack", r.worst_term_slack},
            {"per_term_holds", r.per_term_holds},
            {"total_holds", r.total_holds}};
}

} // namespace randghep
