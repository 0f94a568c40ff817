#include "mbcascade/cascade_enumerator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mbcascade {

namespace {

std::vector<size_t> shuffled(size_t n, unsigned seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::mt19937 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

double point_segment_sq(const Vec3& x, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double s = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return (x - (a + s * ab)).squaredNorm();
}

// Early-break directed distance of the vertices of A to the segments of polyline B.
double directed_curve(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
    if (B.size() == 1) return directed_hausdorff(A, B);
    double cmax = 0.0;
    const std::vector<size_t> ia = shuffled(A.size(), 7u);
    const std::vector<size_t> ib = shuffled(B.size() - 1, 11u);
    for (size_t i : ia) {
        double cmin = std::numeric_limits<double>::infinity();
        bool early = false;
        for (size_t j : ib) {
            const double d = point_segment_sq(A[i], B[j], B[j + 1]);
            if (d < cmax) {
                early = true;
                break;
            }
            cmin = std::min(cmin, d);
        }
        if (!early && cmin > cmax) cmax = cmin;
    }
    return std::sqrt(cmax);
}

}  // namespace

double compactify(double t) {
    if (std::isinf(t)) return t > 0 ? 1.0 : -1.0;
    return t / std::sqrt(1.0 + t * t);
}

double directed_hausdorff(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
    if (A.empty() || B.empty()) throw EmptySet("hausdorff distance of an empty set");
    double cmax = 0.0;
    const std::vector<size_t> ia = shuffled(A.size(), 3u);
    const std::vector<size_t> ib = shuffled(B.size(), 5u);
    for (size_t i : ia) {
        double cmin = std::numeric_limits<double>::infinity();
        bool early = false;
        for (size_t j : ib) {
            const double d = (A[i] - B[j]).squaredNorm();
            if (d < cmax) {
                early = true;
                break;
            }
            cmin = std::min(cmin, d);
        }
        if (!early && cmin > cmax) cmax = cmin;
    }
    return std::sqrt(cmax);
}

double hausdorff_distance(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
    return std::max(directed_hausdorff(A, B), directed_hausdorff(B, A));
}

double time_vector_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("time vectors of different length");
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(compactify(a[i]) - compactify(b[i])));
    return d;
}

double hausdorff_distance(const std::vector<Vec3>& A, const std::vector<Vec3>& B,
                          const std::vector<double>& ta, const std::vector<double>& tb) {
    return std::max(hausdorff_distance(A, B), time_vector_distance(ta, tb));
}

double image_distance(const CascadeImage& a, const CascadeImage& b) {
    if (a.points.empty() || b.points.empty()) throw EmptySet("image distance of an empty image");
    const double d = std::max(directed_curve(a.points, b.points), directed_curve(b.points, a.points));
    return std::max(d, time_vector_distance(a.time_vector, b.time_vector));
}

}  // namespace mbcascade
