// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "vlbal/error.hpp"
#include "vlbal/rng.hpp"

namespace vlbal {

namespace {

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::int64_t integer_field(const nlohmann::json& rec, const char* key, std::size_t line) {
    const auto it = rec.find(key);
    if (it == rec.end()) line_error(line, std::string("missing field '") + key + "'");
    if (!it->is_number_integer()) line_error(line, std::string("field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

Dataset read_dataset(std::istream& in) {
    std::vector<Sample> samples;
    std::unordered_set<std::string> ids;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error&) {
            line_error(line, "malformed JSON record");
        }
        if (!rec.is_object()) line_error(line, "record must be a JSON object");
        const auto id = rec.find("id");
        if (id == rec.end() || !id->is_string()) line_error(line, "missing string field 'id'");
        Sample s;
        s.id = id->get<std::string>();
        s.vision_units = integer_field(rec, "vision_units", line);
        s.text_tokens = integer_field(rec, "text_tokens", line);
        if (s.vision_units < 0) line_error(line, "vision_units must be >= 0");
        if (s.text_tokens < 1) line_error(line, "text_tokens must be >= 1");
        if (!ids.insert(s.id).second) line_error(line, "duplicate id '" + s.id + "'");
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples));
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset '" + path.string() + "'");
    return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    for (const Sample& s : dataset.samples()) {
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["vision_units"] = s.vision_units;
        j["text_tokens"] = s.text_tokens;
        out << j.dump() << '\n';
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    write_dataset(out, dataset);
}

// ---------------------------------------------------------------------------

void SynthDistribution::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, "synthetic distribution: " + what); };
    if (!(text_sigma >= 0.0) || !std::isfinite(text_mu)) fail("text parameters must be finite, sigma >= 0");
    if (text_cap < 1) fail("text_cap must be >= 1");
    if (vision_weights.empty()) fail("vision_weights must not be empty");
    double total = 0.0;
    for (double w : vision_weights) {
        if (!(w >= 0.0)) fail("vision weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) fail("vision weights must sum to 1");
}

std::vector<double> uniform_vision_weights(int lo, int hi) {
    if (lo < 0 || hi < lo) throw Error(ErrorCode::InvalidInput, "uniform_vision_weights: need 0 <= lo <= hi");
    std::vector<double> w(static_cast<std::size_t>(hi) + 1, 0.0);
    for (int k = lo; k <= hi; ++k) w[static_cast<std::size_t>(k)] = 1.0 / (hi - lo + 1);
    return w;
}

Dataset generate_dataset(const SynthDistribution& dist) {
    dist.validate();
    std::vector<double> cumulative(dist.vision_weights.size());
    std::partial_sum(dist.vision_weights.begin(), dist.vision_weights.end(), cumulative.begin());

    Rng rng(dist.seed);
    std::vector<Sample> samples;
    samples.reserve(dist.sample_count);
    for (std::size_t i = 0; i < dist.sample_count; ++i) {
        Sample s;
        s.id = "s" + std::to_string(i);
        const double len = std::exp(dist.text_mu + dist.text_sigma * rng.normal());
        const double clamped = std::min(static_cast<double>(dist.text_cap), std::max(1.0, std::round(len)));
        s.text_tokens = static_cast<std::int64_t>(clamped);
        const double u = rng.uniform() * cumulative.back();
        std::size_t k = 0;
        while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
        s.vision_units = static_cast<std::int64_t>(k);
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples));
}

std::vector<std::string> synth_preset_names() {
    return {"mixed-12", "internvl-like", "llava-like", "caption-like", "patch-1", "patch-4", "patch-6", "patch-12"};
}

SynthDistribution synth_preset(std::string_view name, std::size_t sample_count, std::uint64_t seed) {
    SynthDistribution d;
    d.sample_count = sample_count;
    d.seed = seed;
    if (name == "mixed-12") {
        d.vision_weights = uniform_vision_weights(1, 12);
    } else if (name == "internvl-like") {
        // About 450 text tokens per tile, so q_text = 4096 derives q_vision = 9.
        d.text_mu = 6.6;
        d.text_sigma = 0.7;
        d.vision_weights = {0.05, 0.45, 0.20, 0.10, 0.10, 0.05, 0.05};
    } else if (name == "llava-like") {
        d.text_mu = 5.2;
        d.text_sigma = 1.0;
        d.vision_weights = {0.05, 0.35, 0.15, 0.10, 0.10, 0.10, 0.15};
    } else if (name == "caption-like") {
        d.text_mu = 4.3;
        d.text_sigma = 0.5;
        d.vision_weights = {0.0, 0.7, 0.2, 0.0, 0.1};
    } else if (name.starts_with("patch-")) {
        const std::string n(name.substr(6));
        if (n != "1" && n != "4" && n != "6" && n != "12") {
            throw Error(ErrorCode::InvalidInput, "unknown synthetic preset '" + std::string(name) + "'");
        }
        d.vision_weights = uniform_vision_weights(1, std::stoi(n));
    } else {
        throw Error(ErrorCode::InvalidInput, "unknown synthetic preset '" + std::string(name) + "'");
    }
    return d;
}

} // namespace vlbal
