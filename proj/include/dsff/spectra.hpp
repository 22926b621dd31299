#pragma once

// Eigenvalues of sampled matrices and the on-disk spectrum cache.
//
// Cache layout: one line of canonical JSON
//   {"format":"dsff-lab-spectra","format_version":1,"master_seed":...,
//    "samples":M,"spec":{"distribution":...,"field":...,"kappa4":...,"n":N}}
// followed by '\n' and M*N little-endian float64 (re, im) pairs, sample-major.

#include <algorithm>
#include <atomic>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <nlohmann/json.hpp>

#include "dsff/ensembles.hpp"
#include "dsff/error.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace dsff {

inline constexpr int kSpectraFormatVersion = 1;
inline constexpr std::string_view kSpectraMagic = "dsff-lab-spectra";

struct SpectrumSample {
    std::vector<std::complex<double>> eigenvalues;
    std::uint64_t sample_index = 0;
};

struct SpectrumSet {
    EnsembleSpec spec;
    std::uint64_t master_seed = 0;
    std::vector<SpectrumSample> samples;
    int format_version = kSpectraFormatVersion;

    std::size_t sample_count() const noexcept { return samples.size(); }
};

/// Base of all cache decoding failures.
class SpectraFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorruptHeaderError : public SpectraFormatError {
public:
    using SpectraFormatError::SpectraFormatError;
};

class VersionMismatchError : public SpectraFormatError {
public:
    VersionMismatchError(const std::string& what, int found)
        : SpectraFormatError(what), found_(found) {}
    int found() const noexcept { return found_; }

private:
    int found_;
};

class LengthMismatchError : public SpectraFormatError {
public:
    LengthMismatchError(const std::string& what, std::uint64_t expected, std::uint64_t actual)
        : SpectraFormatError(what), expected_(expected), actual_(actual) {}
    std::uint64_t expected_values() const noexcept { return expected_; }
    std::uint64_t actual_values() const noexcept { return actual_; }

private:
    std::uint64_t expected_;
    std::uint64_t actual_;
};

/// Eigenvalues of the dense nonsymmetric sample by Hessenberg reduction and
/// shifted QR (LAPACK xGEEV, no eigenvectors). Unordered.
inline SpectrumSample eigenvalues(const MatrixSample& matrix) {
    SpectrumSample out;
    out.sample_index = matrix.index;
    const auto n = matrix.size();
    if (n == 0) return out;
    const auto ld = static_cast<lapack_int>(n);
    out.eigenvalues.resize(n);

    lapack_int info = 0;
    if (const auto* real = std::get_if<RealMatrix>(&matrix.entries)) {
        for (double v : real->data)
            if (!std::isfinite(v)) throw InvalidArgument("eigenvalues: non-finite matrix entry");
        std::vector<double> a = real->data;
        std::vector<double> wr(n), wi(n);
        info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', ld, a.data(), ld, wr.data(), wi.data(), nullptr, 1,
                             nullptr, 1);
        for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = {wr[i], wi[i]};
    } else {
        const auto& cplx = std::get<ComplexMatrix>(matrix.entries);
        for (auto z : cplx.data)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw InvalidArgument("eigenvalues: non-finite matrix entry");
        std::vector<std::complex<double>> a = cplx.data;
        info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', ld, a.data(), ld, out.eigenvalues.data(), nullptr, 1,
                             nullptr, 1);
    }
    if (info > 0) {
        throw EigenSolverError("eigenvalues: QR iteration failed to converge for sample " +
                                   std::to_string(matrix.index) + " (" + std::to_string(info) +
                                   " eigenvalues unresolved)",
                               matrix.index);
    }
    if (info < 0) {
        throw EigenSolverError("eigenvalues: invalid argument " + std::to_string(-info) + " to xGEEV",
                               matrix.index);
    }
    return out;
}

/// |sum sigma_i - trace(X)|.
inline double trace_residual(const SpectrumSample& spectrum, const MatrixSample& matrix) {
    std::complex<double> sum{};
    for (auto z : spectrum.eigenvalues) sum += z;
    const std::complex<double> tr = std::visit(
        [](const auto& m) { return std::complex<double>(m.trace()); }, matrix.entries);
    return std::abs(sum - tr);
}

/// True when the multiset of eigenvalues can be paired with its complex
/// conjugates within `tol` (real eigenvalues pair with themselves).
inline bool is_conjugation_closed(std::span<const std::complex<double>> eigs, double tol) {
    std::vector<bool> used(eigs.size(), false);
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        if (used[i]) continue;
        const auto target = std::conj(eigs[i]);
        std::size_t best = eigs.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = i; j < eigs.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(eigs[j] - target);
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best == eigs.size() || best_dist > tol) return false;
        used[i] = true;
        used[best] = true;
    }
    return true;
}

inline double spectral_radius(std::span<const std::complex<double>> eigs) {
    double r = 0.0;
    for (auto z : eigs) r = std::max(r, std::abs(z));
    return r;
}

/// M independent spectra, sample i drawn from stream (master_seed, i).
/// Output is identical for every worker count.
inline SpectrumSet sample_spectra(const EnsembleSpec& spec, std::size_t m, std::uint64_t master_seed,
                                  unsigned workers = 1) {
    if (m < 1) throw InvalidArgument("sample_spectra: need at least one sample");
    if (spec.n < 1) throw InvalidArgument("sample_spectra: n must be >= 1");
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(m)));
    // Parallelism lives at the sample level; keep BLAS single-threaded so
    // every decomposition follows the same code path.
    openblas_set_num_threads(1);

    SpectrumSet set;
    set.spec = spec;
    set.master_seed = master_seed;
    set.samples.resize(m);
    std::vector<std::exception_ptr> errors(m);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < m; i = next.fetch_add(1)) {
            try {
                set.samples[i] = eigenvalues(sample_matrix(spec, master_seed, i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return set;
}

namespace detail {

inline void put_f64(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.append(buf, 8);
}

inline double get_f64(const char* p) {
    std::uint64_t bits;
    std::memcpy(&bits, p, 8);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline nlohmann::json spectra_header(const SpectrumSet& set) {
    nlohmann::json h;
    h["format"] = std::string(kSpectraMagic);
    h["format_version"] = set.format_version;
    h["master_seed"] = set.master_seed;
    h["samples"] = set.samples.size();
    h["spec"] = to_json(set.spec);
    return h;
}

inline std::string encode_spectra(const SpectrumSet& set) {
    const auto n = static_cast<std::size_t>(set.spec.n);
    std::string out = spectra_header(set).dump();
    out.push_back('\n');
    out.reserve(out.size() + set.samples.size() * n * 16);
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        const auto& s = set.samples[i];
        if (s.eigenvalues.size() != n || s.sample_index != i)
            throw InvalidArgument("encode_spectra: sample " + std::to_string(i) +
                                  " has wrong size or index");
        for (auto z : s.eigenvalues) {
            detail::put_f64(out, z.real());
            detail::put_f64(out, z.imag());
        }
    }
    return out;
}

/// Inverse of encode_spectra. `origin` names the source in error messages.
inline SpectrumSet decode_spectra(std::string_view bytes, const std::string& origin = "<memory>") {
    const auto nl = bytes.find('\n');
    if (nl == std::string_view::npos)
        throw CorruptHeaderError(origin + ": missing header line");
    nlohmann::json header = nlohmann::json::parse(bytes.substr(0, nl), nullptr, false);
    if (header.is_discarded() || !header.is_object())
        throw CorruptHeaderError(origin + ": header is not a JSON object");
    if (!header.contains("format") || header["format"] != kSpectraMagic)
        throw CorruptHeaderError(origin + ": bad magic (not a dsff-lab spectrum cache)");
    if (!header.contains("format_version") || !header["format_version"].is_number_integer())
        throw CorruptHeaderError(origin + ": missing format_version");
    const int version = header["format_version"].get<int>();
    if (version != kSpectraFormatVersion)
        throw VersionMismatchError(origin + ": format_version " + std::to_string(version) +
                                       " is not supported (expected " +
                                       std::to_string(kSpectraFormatVersion) + ")",
                                   version);

    SpectrumSet set;
    std::uint64_t m = 0;
    try {
        set.spec = ensemble_spec_from_json(header.at("spec"));
        set.master_seed = header.at("master_seed").get<std::uint64_t>();
        m = header.at("samples").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptHeaderError(origin + ": malformed header field: " + e.what());
    } catch (const InvalidArgument& e) {
        throw CorruptHeaderError(origin + ": " + e.what());
    }
    if (m < 1) throw CorruptHeaderError(origin + ": sample count must be >= 1");
    set.format_version = version;

    const auto n = static_cast<std::uint64_t>(set.spec.n);
    const auto payload = bytes.substr(nl + 1);
    const std::uint64_t expected = m * n;
    if (payload.size() % 16 != 0 || payload.size() / 16 != expected) {
        const std::uint64_t actual = payload.size() / 16;
        throw LengthMismatchError(origin + ": payload holds " + std::to_string(actual) +
                                      " eigenvalues" + (payload.size() % 16 ? " (plus a partial record)" : "") +
                                      ", header promises " + std::to_string(expected) + " (M=" +
                                      std::to_string(m) + ", N=" + std::to_string(n) + ")",
                                  expected, actual);
    }

    set.samples.resize(m);
    const char* p = payload.data();
    for (std::uint64_t i = 0; i < m; ++i) {
        auto& s = set.samples[i];
        s.sample_index = i;
        s.eigenvalues.resize(n);
        for (auto& z : s.eigenvalues) {
            z = {detail::get_f64(p), detail::get_f64(p + 8)};
            p += 16;
        }
    }
    return set;
}

inline void save_spectra(const SpectrumSet& set, const std::filesystem::path& path) {
    const auto bytes = encode_spectra(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

inline SpectrumSet load_spectra(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_spectra(bytes, path.string());
}

}  // namespace dsff
