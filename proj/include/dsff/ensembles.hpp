#pragma once

// I.i.d. matrix ensembles X_ij = chi / sqrt(N) with E chi = 0, E|chi|^2 = 1
// (and E chi^2 = 0 for complex entries).

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsff/error.hpp"
#include "dsff/theory.hpp"

namespace dsff {

enum class Field { real, complex };
enum class Distribution { gaussian, rademacher, uniform };

inline std::string_view to_string(Field f) { return f == Field::real ? "real" : "complex"; }

inline std::string_view to_string(Distribution d) {
    switch (d) {
        case Distribution::gaussian: return "gaussian";
        case Distribution::rademacher: return "rademacher";
        case Distribution::uniform: return "uniform";
    }
    return "?";
}

inline std::optional<Field> parse_field(std::string_view s) {
    if (s == "real") return Field::real;
    if (s == "complex") return Field::complex;
    return std::nullopt;
}

inline std::optional<Distribution> parse_distribution(std::string_view s) {
    if (s == "gaussian") return Distribution::gaussian;
    if (s == "rademacher") return Distribution::rademacher;
    if (s == "uniform") return Distribution::uniform;
    return std::nullopt;
}

struct EnsembleSpec {
    Field field = Field::complex;
    Distribution distribution = Distribution::gaussian;
    long n = 1;

    Beta beta() const { return field == Field::real ? Beta::real : Beta::complex; }

    friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

/// E x^4 of the real law of unit variance used for each real component.
inline double real_fourth_moment(Distribution d) {
    switch (d) {
        case Distribution::gaussian: return 3.0;
        case Distribution::rademacher: return 1.0;
        case Distribution::uniform: return 9.0 / 5.0;  // uniform on [-sqrt3, sqrt3]
    }
    return 0.0;
}

/// kappa4 = E|chi|^4 - (1 + 2/beta). Complex entries are (a + ib)/sqrt2
/// with a, b independent copies of the real law, so E|chi|^4 = (m4 + 1)/2.
inline double kappa4_of(const EnsembleSpec& spec) {
    const double m4 = real_fourth_moment(spec.distribution);
    if (spec.field == Field::real) return m4 - 3.0;
    return (m4 + 1.0) / 2.0 - 2.0;
}

inline nlohmann::json to_json(const EnsembleSpec& spec) {
    nlohmann::json j;
    j["field"] = std::string(to_string(spec.field));
    j["distribution"] = std::string(to_string(spec.distribution));
    j["n"] = spec.n;
    j["kappa4"] = kappa4_of(spec);
    return j;
}

inline EnsembleSpec ensemble_spec_from_json(const nlohmann::json& j) {
    EnsembleSpec spec;
    const auto field = parse_field(j.at("field").get<std::string>());
    const auto dist = parse_distribution(j.at("distribution").get<std::string>());
    if (!field || !dist) throw InvalidArgument("ensemble spec: unknown field or distribution");
    spec.field = *field;
    spec.distribution = *dist;
    spec.n = j.at("n").get<long>();
    if (spec.n < 1) throw InvalidArgument("ensemble spec: n must be >= 1");
    return spec;
}

/// Column-major square matrix.
template <class Scalar>
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<Scalar> data;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t size) : n(size), data(size * size) {}

    Scalar& operator()(std::size_t i, std::size_t j) { return data[j * n + i]; }
    const Scalar& operator()(std::size_t i, std::size_t j) const { return data[j * n + i]; }

    Scalar trace() const {
        Scalar acc{};
        for (std::size_t i = 0; i < n; ++i) acc += (*this)(i, i);
        return acc;
    }
};

using RealMatrix = DenseMatrix<double>;
using ComplexMatrix = DenseMatrix<std::complex<double>>;

struct MatrixSample {
    std::variant<RealMatrix, ComplexMatrix> entries;
    std::uint64_t master_seed = 0;
    std::uint64_t index = 0;

    std::size_t size() const {
        return std::visit([](const auto& m) { return m.n; }, entries);
    }
};

/// Engine for sample `index` under `master_seed`. Each sample owns its own
/// stream, so samples can be drawn in any order or in parallel.
inline std::mt19937_64 sample_engine(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x64736666u};
    return std::mt19937_64(seq);
}

namespace detail {

// One draw of the unit-variance real law.
class RealLaw {
public:
    explicit RealLaw(Distribution d) : dist_(d) {}

    double operator()(std::mt19937_64& eng) {
        switch (dist_) {
            case Distribution::gaussian: return normal_(eng);
            case Distribution::rademacher: return (eng() >> 63) ? 1.0 : -1.0;
            case Distribution::uniform: return uniform_(eng);
        }
        return 0.0;
    }

private:
    Distribution dist_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{-1.7320508075688772, 1.7320508075688772};
};

}  // namespace detail

/// Sample `index` of the ensemble: entries chi / sqrt(N) drawn in column-major order.
inline MatrixSample sample_matrix(const EnsembleSpec& spec, std::uint64_t master_seed, std::uint64_t index) {
    if (spec.n < 1) throw InvalidArgument("sample_matrix: n must be >= 1");
    const auto n = static_cast<std::size_t>(spec.n);
    auto eng = sample_engine(master_seed, index);
    detail::RealLaw law(spec.distribution);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.n));

    MatrixSample sample;
    sample.master_seed = master_seed;
    sample.index = index;
    if (spec.field == Field::real) {
        RealMatrix m(n);
        for (auto& x : m.data) x = law(eng) * scale;
        sample.entries = std::move(m);
    } else {
        ComplexMatrix m(n);
        const double cscale = scale / std::sqrt(2.0);
        for (auto& z : m.data) {
            const double re = law(eng);
            const double im = law(eng);
            z = {re * cscale, im * cscale};
        }
        sample.entries = std::move(m);
    }
    return sample;
}

}  // namespace dsff
