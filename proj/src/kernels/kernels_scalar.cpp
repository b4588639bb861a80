#include "fosls/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace fosls::kernels {

Csr Csr::from_triplets(int rows, int cols,
                       std::vector<std::tuple<int, int, double>> triplets,
                       bool drop_zeros) {
    for (auto& [r, c, v] : triplets) {
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw std::out_of_range("Csr::from_triplets: index out of range");
        (void)v;
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const auto& a, const auto& b) {
                  return std::get<0>(a) != std::get<0>(b)
                             ? std::get<0>(a) < std::get<0>(b)
                             : std::get<1>(a) < std::get<1>(b);
              });
    Csr m;
    m.rows = rows;
    m.cols = cols;
    m.rowptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    std::size_t i = 0;
    while (i < triplets.size()) {
        auto [r, c, v] = triplets[i];
        std::size_t j = i + 1;
        while (j < triplets.size() && std::get<0>(triplets[j]) == r &&
               std::get<1>(triplets[j]) == c) {
            v += std::get<2>(triplets[j]);
            ++j;
        }
        if (!(drop_zeros && v == 0.0)) {
            m.colidx.push_back(c);
            m.vals.push_back(v);
            ++m.rowptr[static_cast<std::size_t>(r) + 1];
        }
        i = j;
    }
    for (int r = 0; r < rows; ++r) m.rowptr[r + 1] += m.rowptr[r];
    return m;
}

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void spmv_scalar(const Csr& m, const double* x, double* y) {
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int k = m.rowptr[r]; k < m.rowptr[r + 1]; ++k)
            s += m.vals[k] * x[m.colidx[k]];
        y[r] = s;
    }
}

void relu_scalar(double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void bisu_scalar(double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = z[i] > 0.0 ? 1.0 : 0.0;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{"scalar",      dot_scalar,  axpy_scalar,
                               axpby_scalar,  scal_scalar, spmv_scalar,
                               relu_scalar,   bisu_scalar};
    return t;
}

}  // namespace fosls::kernels
