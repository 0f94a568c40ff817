#pragma once

#include "mbcascade/cascade_enumerator.hpp"
#include "mbcascade/perturbation_builder.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mbcascade {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

enum class Ring { Z, Z2 };
const char* to_string(Ring r);

struct DSquaredNonzero : std::runtime_error {
    DSquaredNonzero(int degree, int column, const std::string& msg)
        : std::runtime_error(msg), degree(degree), column(column) {}
    int degree;
    int column;
};
struct MatchIncomplete : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GradedComplex {
    Ring ring = Ring::Z;
    std::vector<std::vector<int>> generators;  // per degree, generator ids
    std::vector<IntMatrix> boundary;           // boundary[k]: |gen_{k-1}| x |gen_k| (k = 0 has no rows)
};

struct HomologyResult {
    std::vector<int> betti;
    std::vector<std::vector<long long>> torsion;  // per degree, invariant factors > 1
    int euler_characteristic() const;
};

struct SmithForm {
    std::vector<long long> diagonal;  // nonzero invariant factors, each dividing the next
    int rank = 0;
};

SmithForm smith_normal_form(const IntMatrix& A);
int rank_mod2(const IntMatrix& A);

using CountTable = std::map<std::pair<int, int>, long long>;  // (q, p) -> count

// Throws DSquaredNonzero naming the degree and column of the first nonzero entry of d o d.
GradedComplex assemble(const MorseBottScenario& sc, const CountTable& counts, Ring ring);
void verify_d_squared(const GradedComplex& c);
HomologyResult homology(const GradedComplex& c);

// All pairs (q, p) with total index drop one.
std::vector<std::pair<int, int>> adjacent_pairs(const MorseBottScenario& sc);

// ---- gradient lines of h --------------------------------------------------------

struct HFlowLine {
    int q = -1, p = -1;
    double parameter = 0.0;
    std::string family;
    Landing landing;
    Trajectory trajectory;
    std::vector<Vec3> polyline;
    std::vector<double> time_vector;  // eps-scaled time in the inner tubes of intermediate submanifolds
    int sign = 0;
};

struct HFlowEnumeration {
    int q = -1, p = -1;
    double epsilon = 0.0;
    std::vector<HFlowLine> lines;
    std::vector<std::string> notes;
    int integrations = 0;
    long long signed_count = 0;
};

// Isolated gradient lines of h from q to p, found by shooting from the Hessian
// unstable sphere at q, each with its orientation sign.
HFlowEnumeration h_flow_lines(const PerturbationData& pd, int q, int p, const CascadeSettings& cfg = {});
long long signed_count_h_eps(const PerturbationData& pd, int q, int p, const CascadeSettings& cfg = {});

int cascade_count_z2(const MorseBottScenario& sc, int q, int p, const CascadeSettings& cfg = {});
// Signed cascade count from signs carried through a matching (one entry per cascade).
// Throws MatchIncomplete if any cascade has no sign.
long long cascade_count_z(const std::vector<std::optional<int>>& cascade_signs);

}  // namespace mbcascade
