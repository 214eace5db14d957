#pragma once

#include <cstdint>
#include <optional>

#include "presym/hamreduce.hpp"

namespace presym {

enum class Picture { Lagrangian, Hamiltonian, Both };
enum class Format { Text, Json };

struct AnalysisRequest {
    LagrangianSpec spec;
    Picture picture = Picture::Both;
    int max_generations = 10;
    int verify_samples = 16;
    std::uint64_t rng_seed = 1;
    Format format = Format::Text;
};

/// Cross-picture correspondence: the generation-0 velocity map and whether
/// every constraint of one picture vanishes on the other picture's surface.
struct EquivalenceRecord {
    std::vector<std::pair<std::string, std::string>> map;  // v-name -> expr over (q, p)
    bool matched = false;
};

struct VerificationSummary {
    int samples = 0;
    Real max_residual = 0;
};

struct Report {
    AnalysisRequest request;
    PhaseSpaceModel model;
    std::optional<LagrangianReduction> lag;
    std::optional<HamiltonianReduction> ham;
    std::optional<EquivalenceRecord> equivalence;
    std::optional<VerificationSummary> verification;
    std::vector<Expr> side_conditions;   // merged, sign-normalized, deduplicated
    std::vector<std::string> warnings;
};

/// Parses the declarative input format: `system "<name>"`, `dim N`,
/// `param <ident> [= rational]`, `function <ident>`, `lagrangian = <expr>`,
/// with '#' comments.  Throws InputError / ParseError on malformed input.
LagrangianSpec parse_system_file(const std::string& path);
LagrangianSpec parse_system_text(const std::string& text, const std::string& origin);

/// Applies `--set name=value` parameter assignments to a parsed spec.
void set_parameter(LagrangianSpec& spec, const std::string& name, const Rational& value);

EquivalenceRecord cross_check(const PhaseSpaceModel& model,
                              const LagrangianReduction& lag,
                              const HamiltonianReduction& ham);

VerificationSummary numeric_verify(const PhaseSpaceModel& model,
                                   const LagrangianReduction& lag,
                                   int samples, std::uint64_t seed);
VerificationSummary numeric_verify(const PhaseSpaceModel& model,
                                   const HamiltonianReduction& ham,
                                   int samples, std::uint64_t seed);

Report analyze(const AnalysisRequest& request);

std::string render_report(const Report& report, Format format);
std::string render_reports(const std::vector<Report>& reports, Format format);

/// Full CLI driver; returns the process exit code (0 ok, 1 analysis error,
/// 2 input error).
int cli_main(int argc, const char* const* argv);

} // namespace presym
