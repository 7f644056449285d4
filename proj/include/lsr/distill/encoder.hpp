#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsr/detail/binary_io.hpp"
#include "lsr/error.hpp"
#include "lsr/sparse_vector.hpp"
#include "lsr/vocabulary.hpp"

namespace lsr::distill {

/// Toy inference-free document encoder.
///
/// Output activation of token j for a document with token counts c:
///     w_j = log(1 + max(0, bias_j + sum_t c_t * expansion(t, j)))
/// `expansion` is stored row-major with rows indexed by the input token.
class EncoderParams {
  public:
    EncoderParams() = default;

    explicit EncoderParams(std::size_t vocab_size)
        : m_vocab(vocab_size), m_expansion(vocab_size * vocab_size, 0.0), m_bias(vocab_size, 0.0)
    {}

    /// Identity expansion scaled by `diagonal`, zero bias.
    static EncoderParams identity(std::size_t vocab_size, double diagonal = 0.5)
    {
        EncoderParams p(vocab_size);
        for (std::size_t t = 0; t < vocab_size; ++t) {
            p.expansion(t, t) = diagonal;
        }
        return p;
    }

    [[nodiscard]] std::size_t vocab_size() const { return m_vocab; }

    double &expansion(std::size_t input, std::size_t output) { return m_expansion[input * m_vocab + output]; }
    [[nodiscard]] double expansion(std::size_t input, std::size_t output) const
    {
        return m_expansion[input * m_vocab + output];
    }

    [[nodiscard]] std::span<double const> expansion_row(std::size_t input) const
    {
        return std::span<double const>(m_expansion).subspan(input * m_vocab, m_vocab);
    }

    std::vector<double> &expansion_data() { return m_expansion; }
    [[nodiscard]] std::vector<double> const &expansion_data() const { return m_expansion; }
    std::vector<double> &bias() { return m_bias; }
    [[nodiscard]] std::vector<double> const &bias() const { return m_bias; }

    /// Number of scalar parameters (matrix entries followed by bias entries).
    [[nodiscard]] std::size_t size() const { return m_expansion.size() + m_bias.size(); }

    /// Flat parameter access: [0, vocab^2) is the matrix, then the bias.
    double &flat(std::size_t i) { return i < m_expansion.size() ? m_expansion[i] : m_bias[i - m_expansion.size()]; }
    [[nodiscard]] double flat(std::size_t i) const
    {
        return i < m_expansion.size() ? m_expansion[i] : m_bias[i - m_expansion.size()];
    }

    [[nodiscard]] bool all_finite() const
    {
        for (double v : m_expansion) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        for (double v : m_bias) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    bool operator==(EncoderParams const &) const = default;

  private:
    std::size_t m_vocab = 0;
    std::vector<double> m_expansion;
    std::vector<double> m_bias;
};

/// Pre-activations bias_j + sum_t c_t * expansion(t, j) for every output token.
inline std::vector<double> pre_activations(EncoderParams const &params, SparseVector const &counts)
{
    std::vector<double> z = params.bias();
    for (auto const &e : counts) {
        if (e.token.value >= params.vocab_size()) {
            continue;
        }
        auto row = params.expansion_row(e.token.value);
        for (std::size_t j = 0; j < z.size(); ++j) {
            z[j] += e.weight * row[j];
        }
    }
    return z;
}

inline double activation(double pre) { return pre > 0.0 ? std::log1p(pre) : 0.0; }

/// d activation / d pre-activation; 0 on the clamped side.
inline double activation_slope(double pre) { return pre > 0.0 ? 1.0 / (1.0 + pre) : 0.0; }

/// Dense activations over the full vocabulary.
inline std::vector<double> encode_dense(EncoderParams const &params, SparseVector const &counts)
{
    auto z = pre_activations(params, counts);
    for (double &v : z) {
        v = activation(v);
    }
    return z;
}

inline SparseVector encode_document(EncoderParams const &params, SparseVector const &counts)
{
    auto dense = encode_dense(params, counts);
    return SparseVector::from_dense(std::span<double const>(dense));
}

inline constexpr std::string_view kEncoderMagic = "LSRENCD\x01";
inline constexpr std::uint32_t kEncoderVersion = 1;

/// Encoder file contents: parameters, the vocabulary fingerprint they were
/// trained against, and the effective training configuration as text.
struct EncoderFile {
    EncoderParams params;
    std::uint64_t vocab_fingerprint = 0;
    std::string config;
};

inline std::string serialize_encoder(EncoderFile const &file)
{
    if (!file.params.all_finite()) {
        throw NumericError("refusing to save encoder with non-finite parameters");
    }
    detail::ByteWriter w;
    w.u64(file.vocab_fingerprint);
    w.u32(static_cast<std::uint32_t>(file.params.vocab_size()));
    w.str(file.config);
    for (double v : file.params.expansion_data()) {
        w.f64(v);
    }
    for (double v : file.params.bias()) {
        w.f64(v);
    }
    return detail::frame(kEncoderMagic, kEncoderVersion, w.bytes());
}

inline EncoderFile deserialize_encoder(std::string_view bytes)
{
    auto payload = detail::unframe(bytes, kEncoderMagic, kEncoderVersion, "an encoder");
    detail::ByteReader r(payload);
    EncoderFile file;
    file.vocab_fingerprint = r.u64();
    auto vocab = r.u32();
    file.config = r.str();
    if (static_cast<std::uint64_t>(vocab) * vocab * 8 > r.remaining()) {
        throw TruncatedFile("encoder payload shorter than its declared matrix");
    }
    file.params = EncoderParams(vocab);
    for (double &v : file.params.expansion_data()) {
        v = r.f64();
    }
    for (double &v : file.params.bias()) {
        v = r.f64();
    }
    if (r.remaining() != 0) {
        throw FormatError("corrupt encoder: trailing bytes in payload");
    }
    if (!file.params.all_finite()) {
        throw NumericError("encoder file contains non-finite parameters");
    }
    return file;
}

inline void save_encoder(EncoderFile const &file, std::string const &path)
{
    detail::write_file(path, serialize_encoder(file));
}

/// Loads and, when `vocab` is given, checks the fingerprint against it.
inline EncoderFile load_encoder(std::string const &path, Vocabulary const *vocab = nullptr)
{
    auto file = deserialize_encoder(detail::read_file(path));
    if (vocab != nullptr
        && (vocab->fingerprint() != file.vocab_fingerprint || vocab->size() != file.params.vocab_size())) {
        throw FormatError("encoder " + path + " was trained on a different vocabulary");
    }
    return file;
}

}  // namespace lsr::distill
