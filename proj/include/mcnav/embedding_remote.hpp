#ifndef MCNAV_EMBEDDING_REMOTE_HPP
#define MCNAV_EMBEDDING_REMOTE_HPP

#include <string>

#include "mcnav/embedding.hpp"
#include "mcnav/http_client.hpp"

namespace mcnav {

/// OpenAI-compatible /v1/embeddings client.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(std::string endpoint_url, std::string model, std::string api_key_env_var,
                   double timeout_seconds = 30.0, int max_retries = 2)
        : endpoint_url_(std::move(endpoint_url)),
          model_(std::move(model)),
          api_key_env_var_(std::move(api_key_env_var)),
          timeout_seconds_(timeout_seconds),
          max_retries_(max_retries) {}

    std::string id() const override { return "remote:" + model_; }

    EmbeddingVector embed(const std::string& text) const override {
        if (text.empty()) throw ZeroVector("cannot embed empty text");
        nlohmann::json body{{"model", model_}, {"input", text}};
        nlohmann::json res;
        try {
            res = post_json_with_retries(endpoint_url_, body, api_key_env_var_,
                                         timeout_seconds_, max_retries_);
        } catch (const TransportError& e) {
            throw EmbeddingServiceError(e.what());
        }
        try {
            EmbeddingVector v;
            v.values = res.at("data").at(0).at("embedding").get<std::vector<double>>();
            return v;
        } catch (const nlohmann::json::exception& e) {
            throw EmbeddingServiceError(std::string("unexpected embeddings response: ") +
                                        e.what());
        }
    }

private:
    std::string endpoint_url_;
    std::string model_;
    std::string api_key_env_var_;
    double timeout_seconds_;
    int max_retries_;
};

} // namespace mcnav

#endif
