// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <string>

#include "vlbal/error.hpp"
#include "vlbal/pipesim.hpp"

namespace vlbal {

TimelineFormat parse_timeline_format(std::string_view name) {
    if (name == "json") return TimelineFormat::Json;
    if (name == "svg") return TimelineFormat::Svg;
    throw Error(ErrorCode::InvalidInput, "unknown timeline format '" + std::string(name) + "' (expected json or svg)");
}

namespace {

std::string to_json(const SimResult& r) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["iteration_time"] = r.iteration_time;
    doc["bubble_ratio"] = r.bubble_ratio;
    auto events = nlohmann::ordered_json::array();
    for (const TimelineEvent& e : r.timeline) {
        nlohmann::ordered_json j;
        j["stage"] = e.stage;
        j["micro_batch"] = e.micro_batch;
        j["phase"] = std::string(phase_name(e.phase));
        j["start"] = e.start;
        j["end"] = e.end;
        events.push_back(std::move(j));
    }
    doc["events"] = std::move(events);
    return doc.dump(1) + "\n";
}

const char* phase_color(Phase p) {
    switch (p) {
    case Phase::Fwd: return "#4e79a7";
    case Phase::Bwd: return "#59a14f";
    case Phase::Recompute: return "#f28e2b";
    case Phase::Send: return "#bab0ac";
    case Phase::Recv: return "#d4cfcb";
    }
    return "#000000";
}

std::string to_svg(const SimResult& r) {
    constexpr double kLeft = 70.0;
    constexpr double kTop = 30.0;
    constexpr double kRow = 28.0;
    constexpr double kPlotWidth = 1100.0;
    int stages = static_cast<int>(r.per_stage_busy.size());
    for (const TimelineEvent& e : r.timeline) stages = std::max(stages, e.stage + 1);
    const double width = kLeft + kPlotWidth + 20.0;
    const double height = kTop + kRow * stages + 40.0;
    const double xscale = r.iteration_time > 0.0 ? kPlotWidth / r.iteration_time : 0.0;

    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\" font-family=\"monospace\" font-size=\"11\">\n",
                  width, height, width, height);
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.0f\" y=\"18\">iteration %.6f s, bubble ratio %.4f</text>\n", kLeft,
                  r.iteration_time, r.bubble_ratio);
    out += buf;
    for (int s = 0; s < stages; ++s) {
        std::snprintf(buf, sizeof(buf), "<text x=\"6\" y=\"%.1f\">stage %d</text>\n",
                      kTop + kRow * s + kRow * 0.65, s);
        out += buf;
    }
    for (const TimelineEvent& e : r.timeline) {
        const bool comm = e.phase == Phase::Send || e.phase == Phase::Recv;
        const double y = kTop + kRow * e.stage + (comm ? kRow * 0.70 : 2.0);
        const double h = comm ? kRow * 0.22 : kRow * 0.62;
        const double x = kLeft + e.start * xscale;
        const double w = std::max(0.5, (e.end - e.start) * xscale);
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\" "
                      "stroke=\"#333333\" stroke-width=\"0.3\"><title>stage %d mb %d %s %.6f-%.6f</title></rect>\n",
                      x, y, w, h, phase_color(e.phase), e.stage, e.micro_batch,
                      std::string(phase_name(e.phase)).c_str(), e.start, e.end);
        out += buf;
        if (!comm && w > 14.0) {
            std::snprintf(buf, sizeof(buf), "<text x=\"%.3f\" y=\"%.3f\" fill=\"#ffffff\">%d</text>\n",
                          x + 2.0, y + h * 0.75, e.micro_batch);
            out += buf;
        }
    }
    const double legend_y = kTop + kRow * stages + 22.0;
    double lx = kLeft;
    for (Phase p : {Phase::Fwd, Phase::Bwd, Phase::Recompute, Phase::Send, Phase::Recv}) {
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.0f\" y=\"%.0f\" width=\"12\" height=\"12\" fill=\"%s\"/>"
                      "<text x=\"%.0f\" y=\"%.0f\">%s</text>\n",
                      lx, legend_y - 10.0, phase_color(p), lx + 16.0, legend_y,
                      std::string(phase_name(p)).c_str());
        out += buf;
        lx += 110.0;
    }
    out += "</svg>\n";
    return out;
}

} // namespace

std::string export_timeline(const SimResult& result, TimelineFormat format) {
    return format == TimelineFormat::Json ? to_json(result) : to_svg(result);
}

std::string export_timeline(const SimResult& result, std::string_view format) {
    return export_timeline(result, parse_timeline_format(format));
}

std::vector<TimelineEvent> parse_timeline_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("timeline: ") + e.what());
    }
    if (!doc.contains("events") || !doc["events"].is_array()) {
        throw Error(ErrorCode::SchemaError, "timeline: missing field 'events'");
    }
    std::vector<TimelineEvent> events;
    for (const auto& j : doc["events"]) {
        TimelineEvent e;
        e.stage = j.at("stage").get<int>();
        e.micro_batch = j.at("micro_batch").get<int>();
        e.phase = parse_phase(j.at("phase").get<std::string>());
        e.start = j.at("start").get<double>();
        e.end = j.at("end").get<double>();
        events.push_back(e);
    }
    return events;
}

} // namespace vlbal
