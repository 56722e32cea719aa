// Timing harness for the OpenMP product kernels against their serial
// reference implementations. Also asserts bitwise-identical output, which is
// the contract the blocked reductions are designed to meet.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lrt/cmat.hpp"
#include "lrt/kernels.hpp"
#include "lrt/sparse.hpp"

using lrt::CMat;
using lrt::complex;

namespace {

CMat random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMat A(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) A.data()[i] = complex(dist(rng), dist(rng));
    return A;
}

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

bool bitwise_equal(const CMat& A, const CMat& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) return false;
    return std::memcmp(A.data(), B.data(), sizeof(complex) * A.rows() * A.cols()) == 0;
}

void report(const char* name, double t_ref, double t_omp, bool identical) {
    std::printf("%-22s ref %10.4f ms   omp %10.4f ms   speedup %5.2fx   %s\n", name,
                1e3 * t_ref, 1e3 * t_omp, t_ref / t_omp,
                identical ? "bitwise-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t dim = 4096, rank = 48;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto value = [&](std::size_t fallback) {
            return i + 1 < argc ? std::stoul(argv[++i]) : fallback;
        };
        if (arg == "--dim")
            dim = value(dim);
        else if (arg == "--rank")
            rank = value(rank);
        else if (arg == "--reps")
            reps = int(value(std::size_t(reps)));
        else {
            std::printf("usage: bench_kernels [--dim N] [--rank M] [--reps R]\n");
            return arg == "--help" ? 0 : 2;
        }
    }
#ifdef _OPENMP
    std::printf("dim %zu, rank %zu, reps %d, omp threads %d\n", dim, rank, reps,
                omp_get_max_threads());
#else
    std::printf("dim %zu, rank %zu, reps %d, OpenMP disabled\n", dim, rank, reps);
#endif

    std::mt19937_64 rng(12345);
    const CMat z = random_matrix(dim, rank, rng);
    const CMat tall = random_matrix(dim, rank, rng);
    const CMat small = random_matrix(rank, rank, rng);

    // banded sparse operator with ~5 entries per row, like a lattice Hamiltonian
    std::vector<lrt::SparseOperator::Triplet> trips;
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t off : {std::size_t(0), std::size_t(1), std::size_t(7), std::size_t(64),
                                std::size_t(512)}) {
            if (i + off >= dim) continue;
            trips.push_back({i, i + off, complex(dist(rng), dist(rng))});
        }
    const lrt::SparseOperator S(dim, trips);

    bool all_identical = true;
    CMat out_ref(dim, rank), out_omp(dim, rank);

    double t_ref = time_best_of(reps, [&] { lrt::kern::ref::matmul(z, small, out_ref); });
    double t_omp = time_best_of(reps, [&] { lrt::kern::matmul(z, small, out_omp); });
    bool same = bitwise_equal(out_ref, out_omp);
    all_identical = all_identical && same;
    report("matmul (tall x small)", t_ref, t_omp, same);

    out_ref = tall;
    out_omp = tall;
    t_ref = time_best_of(reps,
                         [&] { lrt::kern::ref::matmul_add(z, small, out_ref, complex(0.3, -0.1)); });
    t_omp = time_best_of(reps, [&] { lrt::kern::matmul_add(z, small, out_omp, complex(0.3, -0.1)); });
    same = bitwise_equal(out_ref, out_omp);
    all_identical = all_identical && same;
    report("matmul_add", t_ref, t_omp, same);

    CMat gram_ref(rank, rank), gram_omp(rank, rank);
    t_ref = time_best_of(reps, [&] { lrt::kern::ref::matmul_adjoint_left(z, tall, gram_ref); });
    t_omp = time_best_of(reps, [&] { lrt::kern::matmul_adjoint_left(z, tall, gram_omp); });
    same = bitwise_equal(gram_ref, gram_omp);
    all_identical = all_identical && same;
    report("matmul_adjoint_left", t_ref, t_omp, same);

    t_ref = time_best_of(reps, [&] {
        lrt::kern::ref::sparse_apply(dim, S.row_ptr().data(), S.col_idx().data(),
                                     S.values().data(), z, out_ref);
    });
    t_omp = time_best_of(reps, [&] {
        lrt::kern::sparse_apply(dim, S.row_ptr().data(), S.col_idx().data(), S.values().data(),
                                z, out_omp);
    });
    same = bitwise_equal(out_ref, out_omp);
    all_identical = all_identical && same;
    report("sparse_apply", t_ref, t_omp, same);

    if (!all_identical) {
        std::printf("FAIL: parallel kernels disagree with the serial reference\n");
        return 1;
    }
    return 0;
}
