#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "metaprobe/error.hpp"
#include "metaprobe/providers.hpp"

namespace metaprobe {

// Request/response shape for each supported vendor. Adding a vendor means
// adding a case here and to kLiveVendors.
enum class WireFormat { openai_chat, anthropic_messages, gemini_generate };

struct VendorSpec {
    std::string_view id;
    std::string_view base_url;
    WireFormat format;
};

inline constexpr VendorSpec kLiveVendors[] = {
    {"openai", "https://api.openai.com", WireFormat::openai_chat},
    {"xai", "https://api.x.ai", WireFormat::openai_chat},
    {"llama", "https://api.llama.com/compat", WireFormat::openai_chat},
    {"anthropic", "https://api.anthropic.com", WireFormat::anthropic_messages},
    {"gemini", "https://generativelanguage.googleapis.com", WireFormat::gemini_generate},
};

inline const VendorSpec* find_vendor(std::string_view id) {
    for (const auto& v : kLiveVendors)
        if (v.id == id) return &v;
    return nullptr;
}

inline std::string env_prefix(std::string_view id) {
    std::string out;
    for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_';
    return out;
}

inline std::optional<std::string> getenv_str(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

class LiveProvider : public Provider {
public:
    // Reads <ID>_API_KEY (required) and <ID>_BASE_URL (optional override).
    LiveProvider(const VendorSpec& vendor, std::string model) : vendor_(vendor), id_(vendor.id), model_(std::move(model)) {
        if (model_.empty()) throw ConfigError("live provider '" + id_ + "' needs a model name");
        auto key_var = env_prefix(id_) + "_API_KEY";
        auto key = getenv_str(key_var);
        if (!key) throw ConfigError("missing credential: set " + key_var);
        api_key_ = *key;
        base_url_ = getenv_str(env_prefix(id_) + "_BASE_URL").value_or(std::string(vendor.base_url));
        auto scheme_end = base_url_.find("://");
        auto path_start = base_url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        if (path_start != std::string::npos) {
            path_prefix_ = base_url_.substr(path_start);
            base_url_.resize(path_start);
        }
    }

    const std::string& id() const override { return id_; }
    const std::string& model() const { return model_; }
    bool is_live() const override { return true; }

    std::string generate(const std::string& prompt, const GenParams& params, std::size_t) override {
        httplib::Client cli(base_url_);
        if (!cli.is_valid()) throw ConfigError("invalid base URL '" + base_url_ + "'");
        auto timeout = std::chrono::duration<double>(params.timeout_s);
        cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

        nlohmann::json body;
        httplib::Headers headers;
        std::string path = path_prefix_;
        switch (vendor_.format) {
        case WireFormat::openai_chat:
            path += "/v1/chat/completions";
            headers.emplace("Authorization", "Bearer " + api_key_);
            body = {{"model", model_},
                    {"messages", {{{"role", "user"}, {"content", prompt}}}},
                    {"temperature", params.temperature},
                    {"max_tokens", params.max_output_tokens}};
            break;
        case WireFormat::anthropic_messages:
            path += "/v1/messages";
            headers.emplace("x-api-key", api_key_);
            headers.emplace("anthropic-version", "2023-06-01");
            body = {{"model", model_},
                    {"max_tokens", params.max_output_tokens},
                    {"temperature", params.temperature},
                    {"messages", {{{"role", "user"}, {"content", prompt}}}}};
            break;
        case WireFormat::gemini_generate:
            path += "/v1beta/models/" + model_ + ":generateContent";
            headers.emplace("x-goog-api-key", api_key_);
            body = {{"contents", {{{"role", "user"}, {"parts", {{{"text", prompt}}}}}}},
                    {"generationConfig",
                     {{"temperature", params.temperature}, {"maxOutputTokens", params.max_output_tokens}}}};
            break;
        }

        auto res = cli.Post(path, headers, body.dump(), "application/json");
        if (!res) throw TransportError(id_ + ": " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500)
            throw TransportError(fmt::format("{}: HTTP {}", id_, res->status));
        if (res->status < 200 || res->status >= 300)
            throw TransportError(fmt::format("{}: HTTP {}: {}", id_, res->status, res->body.substr(0, 300)), false);

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception&) {
            throw TransportError(id_ + ": response body is not JSON", false);
        }
        return extract_text(j);
    }

private:
    // Missing content (refusals, safety blocks) yields "" so the caller marks
    // the response invalid.
    std::string extract_text(const nlohmann::json& j) const {
        std::string out;
        switch (vendor_.format) {
        case WireFormat::openai_chat:
            if (j.contains("choices") && !j["choices"].empty()) {
                const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
                if (msg.contains("content") && msg["content"].is_string()) out = msg["content"].get<std::string>();
            }
            break;
        case WireFormat::anthropic_messages:
            for (const auto& block : j.value("content", nlohmann::json::array()))
                if (block.value("type", "") == "text") out += block.value("text", "");
            break;
        case WireFormat::gemini_generate:
            if (j.contains("candidates") && !j["candidates"].empty()) {
                const auto& content = j["candidates"][0].value("content", nlohmann::json::object());
                for (const auto& part : content.value("parts", nlohmann::json::array())) out += part.value("text", "");
            }
            break;
        }
        return out;
    }

    VendorSpec vendor_;
    std::string id_;
    std::string model_;
    std::string api_key_;
    std::string base_url_;
    std::string path_prefix_;
};

inline std::unique_ptr<Provider> make_live_provider(std::string_view id, std::string model) {
    const auto* v = find_vendor(id);
    if (!v) throw ConfigError("no live vendor named '" + std::string(id) + "'");
    return std::make_unique<LiveProvider>(*v, std::move(model));
}

} // namespace metaprobe
