#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "metaprobe/digest.hpp"
#include "metaprobe/error.hpp"
#include "metaprobe/promptkit.hpp"
#include "metaprobe/respparse.hpp"
#include "metaprobe/text.hpp"

namespace metaprobe {

struct GenParams {
    double temperature = 0.0;
    std::size_t max_output_tokens = 2048;
    std::size_t attempt_limit = 3;
    double timeout_s = 60.0;
    double backoff_initial_s = 0.5; // doubled after each failed attempt

    void validate() const {
        if (!(temperature >= 0)) throw ConfigError("temperature must be >= 0");
        if (attempt_limit < 1) throw ConfigError("attempt_limit must be >= 1");
        if (!(timeout_s > 0)) throw ConfigError("timeout must be > 0");
        if (!(backoff_initial_s >= 0)) throw ConfigError("backoff must be >= 0");
    }

    bool operator==(const GenParams&) const = default;
};

inline void to_json(nlohmann::json& j, const GenParams& p) {
    j = {{"temperature", p.temperature},
         {"max_output_tokens", p.max_output_tokens},
         {"attempt_limit", p.attempt_limit},
         {"timeout_s", p.timeout_s},
         {"backoff_initial_s", p.backoff_initial_s}};
}
inline void from_json(const nlohmann::json& j, GenParams& p) {
    p = GenParams{};
    if (j.contains("temperature")) j.at("temperature").get_to(p.temperature);
    if (j.contains("max_output_tokens")) j.at("max_output_tokens").get_to(p.max_output_tokens);
    if (j.contains("attempt_limit")) j.at("attempt_limit").get_to(p.attempt_limit);
    if (j.contains("timeout_s")) j.at("timeout_s").get_to(p.timeout_s);
    if (j.contains("backoff_initial_s")) j.at("backoff_initial_s").get_to(p.backoff_initial_s);
}

struct ModelResponse {
    std::string text;
    std::string provider_id;
    std::string prompt_digest;
    double latency_s = 0;
    bool valid = true;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual const std::string& id() const = 0;
    virtual bool is_live() const { return false; }
    // Raw generation. Throws TransportError for failures worth retrying.
    virtual std::string generate(const std::string& prompt, const GenParams& params, std::size_t trial) = 0;
};

// ---------------------------------------------------------------------------
// Mock providers
// ---------------------------------------------------------------------------

// Always answers with a fixed text.
class EchoProvider : public Provider {
public:
    EchoProvider(std::string id, std::string text) : id_(std::move(id)), text_(std::move(text)) {}
    const std::string& id() const override { return id_; }
    std::string generate(const std::string&, const GenParams&, std::size_t) override { return text_; }

private:
    std::string id_;
    std::string text_;
};

inline std::unique_ptr<Provider> echo_provider(const std::vector<std::string>& labels) {
    if (labels.empty()) throw ConfigError("echo provider needs a non-empty truth list");
    return std::make_unique<EchoProvider>("echo", serialize_labels(labels));
}
inline std::unique_ptr<Provider> echo_provider(const std::vector<int>& bits) {
    if (bits.empty()) throw ConfigError("echo provider needs a non-empty truth list");
    return std::make_unique<EchoProvider>("echo", serialize_bits(bits));
}
inline std::unique_ptr<Provider> echo_provider(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("echo provider needs a non-empty truth list");
    return std::make_unique<EchoProvider>("echo", serialize_numbers(values));
}

// Trial t answers script[t % script.size()]. "{truth}" in a script entry is
// replaced with the serialized truth, when one was supplied.
class ScriptedProvider : public Provider {
public:
    ScriptedProvider(std::string id, std::vector<std::string> script, std::optional<std::string> truth = std::nullopt)
        : id_(std::move(id)), script_(std::move(script)), truth_(std::move(truth)) {
        if (script_.empty()) throw ConfigError("scripted provider needs at least one response");
    }
    const std::string& id() const override { return id_; }

    std::string generate(const std::string&, const GenParams&, std::size_t trial) override {
        std::string out = script_[trial % script_.size()];
        if (!truth_) return out;
        for (auto pos = out.find("{truth}"); pos != std::string::npos; pos = out.find("{truth}", pos + truth_->size()))
            out.replace(pos, 7, *truth_);
        return out;
    }

private:
    std::string id_;
    std::vector<std::string> script_;
    std::optional<std::string> truth_;
};

// ---------------------------------------------------------------------------
// Cassette
// ---------------------------------------------------------------------------

inline std::string rfc3339_now() {
    auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

struct CassetteEntry {
    std::string prompt_sha256;
    std::size_t trial = 0;
    std::string provider;
    std::string response;
    std::string timestamp;

    bool operator==(const CassetteEntry&) const = default;
};

// Append-only store of responses keyed by (digest, trial, provider). When
// backed by a file every record is appended to it as one JSON line.
class Cassette {
public:
    Cassette() = default;

    // Loads `file` if it exists; later records are appended to it.
    explicit Cassette(std::filesystem::path file) : file_(std::move(file)) {
        std::ifstream in(*file_);
        if (!in) return;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            CassetteEntry e;
            try {
                auto j = nlohmann::json::parse(line);
                j.at("prompt_sha256").get_to(e.prompt_sha256);
                j.at("trial").get_to(e.trial);
                j.at("provider").get_to(e.provider);
                j.at("response").get_to(e.response);
                j.at("timestamp").get_to(e.timestamp);
            } catch (const nlohmann::json::exception& ex) {
                throw DataError(fmt::format("{}:{}: bad cassette line: {}", file_->string(), lineno, ex.what()));
            }
            if (!insert(e))
                throw DataError(fmt::format("{}:{}: duplicate cassette key", file_->string(), lineno));
        }
    }

    Cassette(const Cassette&) = delete;
    Cassette& operator=(const Cassette&) = delete;

    void record(const std::string& digest, std::size_t trial, const std::string& provider, const std::string& response,
                std::string timestamp = rfc3339_now()) {
        std::lock_guard lock(mutex_);
        CassetteEntry e{digest, trial, provider, response, std::move(timestamp)};
        if (!insert(e))
            throw DataError(fmt::format("cassette already holds trial {} of {} for '{}'", trial, digest, provider));
        if (file_) {
            std::ofstream out(*file_, std::ios::app);
            if (!out) throw ConfigError("cannot append to cassette " + file_->string());
            nlohmann::ordered_json j;
            j["prompt_sha256"] = e.prompt_sha256;
            j["trial"] = e.trial;
            j["provider"] = e.provider;
            j["response"] = e.response;
            j["timestamp"] = e.timestamp;
            out << j.dump() << '\n';
        }
    }

    std::optional<CassetteEntry> find(const std::string& digest, std::size_t trial, const std::string& provider) const {
        std::lock_guard lock(mutex_);
        auto it = index_.find({digest, trial, provider});
        if (it == index_.end()) return std::nullopt;
        return entries_[it->second];
    }

    ModelResponse replay(const std::string& digest, std::size_t trial, const std::string& provider) const {
        auto e = find(digest, trial, provider);
        if (!e) throw CassetteMiss(fmt::format("no cassette entry for trial {} of {} from '{}'", trial, digest, provider));
        return {e->response, provider, digest, 0.0, true};
    }

    std::vector<CassetteEntry> entries() const {
        std::lock_guard lock(mutex_);
        return entries_;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

    const std::optional<std::filesystem::path>& file() const { return file_; }

private:
    bool insert(const CassetteEntry& e) {
        if (!index_.emplace(std::tuple{e.prompt_sha256, e.trial, e.provider}, entries_.size()).second) return false;
        entries_.push_back(e);
        return true;
    }

    std::optional<std::filesystem::path> file_;
    std::vector<CassetteEntry> entries_;
    std::map<std::tuple<std::string, std::size_t, std::string>, std::size_t> index_;
    mutable std::mutex mutex_;
};

// Serves recorded responses under another provider's id. Never touches the network.
class ReplayProvider : public Provider {
public:
    ReplayProvider(std::string id, const Cassette& cassette) : id_(std::move(id)), cassette_(cassette) {}
    const std::string& id() const override { return id_; }
    std::string generate(const std::string& prompt, const GenParams&, std::size_t trial) override {
        return cassette_.replay(sha256_hex(prompt), trial, id_).text;
    }

private:
    std::string id_;
    const Cassette& cassette_;
};

// ---------------------------------------------------------------------------
// complete()
// ---------------------------------------------------------------------------

// One generation with retry. Transport failures are retried up to
// attempt_limit with exponential backoff; an empty or blank generation comes
// back with valid=false rather than as an error. When `record` is given, the
// response is appended to it.
inline ModelResponse complete(Provider& provider, const RenderedPrompt& prompt, const GenParams& params,
                              std::size_t trial = 0, Cassette* record = nullptr) {
    params.validate();
    ModelResponse r;
    r.provider_id = provider.id();
    r.prompt_digest = sha256_hex(prompt.text);
    double backoff = params.backoff_initial_s;
    auto start = std::chrono::steady_clock::now();
    for (std::size_t attempt = 1;; ++attempt) {
        try {
            r.text = provider.generate(prompt.text, params, trial);
            break;
        } catch (const TransportError& e) {
            if (!e.retryable || attempt >= params.attempt_limit)
                throw TransportError(fmt::format("{} failed after {} attempt(s): {}", provider.id(), attempt, e.what()),
                                     false);
            if (backoff > 0) std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
    }
    r.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.valid = !text::trim(r.text).empty();
    if (record) record->record(r.prompt_digest, trial, r.provider_id, r.text);
    return r;
}

class ProviderRegistry {
public:
    void add(std::shared_ptr<Provider> p) {
        if (!p || p->id().empty()) throw ConfigError("provider id must be non-empty");
        if (!providers_.emplace(p->id(), p).second) throw ConfigError("provider '" + p->id() + "' registered twice");
    }

    bool contains(std::string_view id) const { return providers_.find(id) != providers_.end(); }

    Provider& get(std::string_view id) const {
        auto it = providers_.find(id);
        if (it == providers_.end()) throw ConfigError("unknown provider '" + std::string(id) + "'");
        return *it->second;
    }

private:
    std::map<std::string, std::shared_ptr<Provider>, std::less<>> providers_;
};

inline ModelResponse complete(const ProviderRegistry& registry, std::string_view provider_id,
                              const RenderedPrompt& prompt, const GenParams& params, std::size_t trial = 0,
                              Cassette* record = nullptr) {
    return complete(registry.get(provider_id), prompt, params, trial, record);
}

// ---------------------------------------------------------------------------
// Label selection
// ---------------------------------------------------------------------------

struct SelectionError : DataError {
    enum class Reason { no_match, ambiguous };
    SelectionError(Reason r, const std::string& m) : DataError(m), reason(r) {}
    Reason reason;
};

// Picks one label either by argmax over per-label scores (ties go to the
// earlier label) or by scanning generated text. In the text scan an exact
// match of the whole trimmed generation wins; otherwise exactly one label may
// occur, where an occurrence lying inside an occurrence of a longer matching
// label does not count.
inline std::string select_label(const LabelSet& labels, const std::optional<std::vector<double>>& scores,
                                const std::optional<std::string>& generated) {
    if (labels.empty()) throw ConfigError("label set is empty");
    if (scores.has_value() == generated.has_value())
        throw ConfigError("select_label needs exactly one of scores or generated text");
    if (scores) {
        if (scores->size() != labels.size())
            throw ConfigError(fmt::format("{} scores for {} labels", scores->size(), labels.size()));
        std::size_t best = 0;
        for (std::size_t i = 0; i < scores->size(); ++i) {
            if (std::isnan((*scores)[i])) throw ConfigError("score is NaN");
            if ((*scores)[i] > (*scores)[best]) best = i;
        }
        return labels[best];
    }

    const std::string& g = *generated;
    auto whole = text::trim(g);
    for (const auto& l : labels.labels())
        if (whole == l) return l;

    struct Span {
        std::size_t label, begin, end;
    };
    std::vector<Span> spans;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (auto pos = g.find(labels[i]); pos != std::string::npos; pos = g.find(labels[i], pos + 1))
            spans.push_back({i, pos, pos + labels[i].size()});

    std::vector<std::size_t> hits;
    for (const auto& s : spans) {
        bool covered = std::any_of(spans.begin(), spans.end(), [&](const Span& o) {
            return o.label != s.label && o.end - o.begin > s.end - s.begin && o.begin <= s.begin && s.end <= o.end;
        });
        if (!covered && std::find(hits.begin(), hits.end(), s.label) == hits.end()) hits.push_back(s.label);
    }
    if (hits.empty()) throw SelectionError(SelectionError::Reason::no_match, "generation matches no candidate label");
    if (hits.size() > 1) {
        std::vector<std::string> names;
        for (auto h : hits) names.push_back("'" + labels[h] + "'");
        throw SelectionError(SelectionError::Reason::ambiguous,
                             "generation matches several labels: " + text::join(names, ", "));
    }
    return labels[hits.front()];
}

} // namespace metaprobe
