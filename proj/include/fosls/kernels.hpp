#pragma once

// Vector kernels used by the solver and the NN forward pass.
// Every kernel has a scalar reference implementation and, on x86-64,
// an AVX2/FMA variant; the variant is picked once at runtime.  The two
// implementations are equivalence-tested against each other.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace fosls::kernels {

// Compressed sparse row matrix. Rows/cols are fixed after finalize();
// duplicate triplets are summed.
struct Csr {
    int rows = 0;
    int cols = 0;
    std::vector<int> rowptr;  // size rows+1
    std::vector<int> colidx;
    std::vector<double> vals;

    static Csr from_triplets(int rows, int cols,
                             std::vector<std::tuple<int, int, double>> triplets,
                             bool drop_zeros = false);
    std::size_t nnz() const { return vals.size(); }
};

struct KernelTable {
    const char* name;
    double (*dot)(const double*, const double*, std::size_t);
    // y += a*x
    void (*axpy)(double a, const double*, double*, std::size_t);
    // y = a*x + b*y
    void (*axpby)(double a, const double*, double b, double*, std::size_t);
    void (*scal)(double a, double*, std::size_t);
    // y = A*x
    void (*spmv)(const Csr&, const double*, double*);
    // z = max(z, 0) elementwise
    void (*relu)(double*, std::size_t);
    // z = (z > 0) ? 1 : 0 elementwise
    void (*bisu)(double*, std::size_t);
};

const KernelTable& scalar_table();
bool avx2_available();          // compiled in and supported by this CPU
const KernelTable* avx2_table();  // nullptr when unavailable

// Active table: AVX2 when available unless FOSLS_ISA=scalar is set.
const KernelTable& active();
std::string active_name();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), y.size());
}
inline void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
    active().axpby(a, x.data(), b, y.data(), y.size());
}
inline void scal(double a, std::span<double> x) { active().scal(a, x.data(), x.size()); }
inline void spmv(const Csr& m, std::span<const double> x, std::span<double> y) {
    active().spmv(m, x.data(), y.data());
}
inline double nrm2(std::span<const double> x) {
    double s = active().dot(x.data(), x.data(), x.size());
    return s > 0 ? std::sqrt(s) : 0.0;
}

}  // namespace fosls::kernels
