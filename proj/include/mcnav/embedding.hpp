#ifndef MCNAV_EMBEDDING_HPP
#define MCNAV_EMBEDDING_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcnav/errors.hpp"

namespace mcnav {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }

    double norm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
};

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw DimMismatch("embedding dims differ: " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine similarity of a zero vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
    return dot / (na * nb);
}

/// Text-to-vector provider. Implementations must be deterministic per id.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual EmbeddingVector embed(const std::string& text) const = 0;
};

/// Offline default: character trigrams hashed (FNV-1a) into 256 count
/// buckets, then L2-normalized. Text is lowercased first; texts shorter than
/// three characters hash as a single gram.
class TrigramEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDim = 256;

    std::string id() const override { return "trigram-256-v1"; }

    static std::size_t bucket(const std::string& gram) {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : gram) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h % kDim);
    }

    EmbeddingVector embed(const std::string& text) const override {
        if (text.empty()) throw ZeroVector("cannot embed empty text");
        std::string lower;
        lower.reserve(text.size());
        for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

        EmbeddingVector v;
        v.values.assign(kDim, 0.0);
        if (lower.size() < 3) {
            v.values[bucket(lower)] += 1.0;
        } else {
            for (std::size_t i = 0; i + 3 <= lower.size(); ++i)
                v.values[bucket(lower.substr(i, 3))] += 1.0;
        }
        const double n = v.norm();
        for (double& x : v.values) x /= n;
        return v;
    }
};

/// Resolve an offline embedder by id. Remote embedders are constructed
/// explicitly from backend configuration (see embedding_remote.hpp).
inline std::unique_ptr<Embedder> make_embedder(const std::string& embedder_id) {
    if (embedder_id == "trigram-256-v1" || embedder_id.empty())
        return std::make_unique<TrigramEmbedder>();
    throw EmbeddingServiceError("unknown embedder id '" + embedder_id + "'");
}

} // namespace mcnav

#endif
