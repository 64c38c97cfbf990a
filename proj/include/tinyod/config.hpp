// Copyright 2026 The tinyod authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <sstream>

#include "tinyod/common.hpp"

namespace tinyod {

// Every tunable default of the pipeline, persisted as plain key=value text.
// Unknown keys are rejected; missing keys keep these defaults.
struct Config {
    uint64_t seed = 42;

    int layers_k = 4;
    int layering_margin_px = 10;
    // Road region override; all four >= 0 replaces the mask-derived rectangle.
    int road_x = -1, road_y = -1, road_w = -1, road_h = -1;

    int superpixel_area = 400;  // pixels per superpixel target
    int superpixel_min_count = 16;
    int superpixel_max_count = 4096;
    double superpixel_edge_weight = 0.5;
    int superpixel_iterations = 10;

    double ridge_gamma = 1.0;
    double edge_label_rho = 0.5;
    int edge_label_dist_px = 2;

    int proposal_budget = 1000;
    double proposal_nms_iou = 0.8;
    double proposal_kappa = 1.5;
    double proposal_eta = 1.0;
    double component_threshold = 0.3;
    double road_inside_min = 0.8;

    int forest_trees = 100;
    int forest_max_depth = 12;
    int forest_min_leaf = 5;
    int forest_mtry = 4;
    int forest_threshold_candidates = 32;
    int forest_max_train_samples = 20000;

    std::string prob_normalization = "max";  // "max" or "count"
    int jobs = 1;

    int synth_count = 20;
    int synth_width = 320;
    int synth_height = 240;
    int synth_near = 2;
    int synth_far = 1;
    double synth_near_contrast = 0.30;
    double synth_far_contrast = 0.12;
    double synth_beta = 0.02;
    double synth_base_height_px = 30.0;
    int synth_zebra = 1;
    int synth_bricks = 1;
    int synth_shadows = 1;
};

namespace detail {

// Visits every field as (key, reference); keeps parse/serialize/compare in sync.
template <typename C, typename F>
void for_each_config_field(C& c, F&& f) {
    f("seed", c.seed);
    f("layers.k", c.layers_k);
    f("layering.margin_px", c.layering_margin_px);
    f("road.x", c.road_x);
    f("road.y", c.road_y);
    f("road.w", c.road_w);
    f("road.h", c.road_h);
    f("superpixel.area", c.superpixel_area);
    f("superpixel.min_count", c.superpixel_min_count);
    f("superpixel.max_count", c.superpixel_max_count);
    f("superpixel.edge_weight", c.superpixel_edge_weight);
    f("superpixel.iterations", c.superpixel_iterations);
    f("ridge.gamma", c.ridge_gamma);
    f("edge_label.rho", c.edge_label_rho);
    f("edge_label.dist_px", c.edge_label_dist_px);
    f("proposal.budget", c.proposal_budget);
    f("proposal.nms_iou", c.proposal_nms_iou);
    f("proposal.kappa", c.proposal_kappa);
    f("proposal.eta", c.proposal_eta);
    f("proposal.component_threshold", c.component_threshold);
    f("proposal.road_inside_min", c.road_inside_min);
    f("forest.trees", c.forest_trees);
    f("forest.max_depth", c.forest_max_depth);
    f("forest.min_leaf", c.forest_min_leaf);
    f("forest.mtry", c.forest_mtry);
    f("forest.threshold_candidates", c.forest_threshold_candidates);
    f("forest.max_train_samples", c.forest_max_train_samples);
    f("probmap.normalization", c.prob_normalization);
    f("jobs", c.jobs);
    f("synth.count", c.synth_count);
    f("synth.width", c.synth_width);
    f("synth.height", c.synth_height);
    f("synth.near", c.synth_near);
    f("synth.far", c.synth_far);
    f("synth.near_contrast", c.synth_near_contrast);
    f("synth.far_contrast", c.synth_far_contrast);
    f("synth.beta", c.synth_beta);
    f("synth.base_height_px", c.synth_base_height_px);
    f("synth.zebra", c.synth_zebra);
    f("synth.bricks", c.synth_bricks);
    f("synth.shadows", c.synth_shadows);
}

inline void assign_config_value(const std::string& key, const std::string& value, int& out) {
    try {
        size_t pos = 0;
        out = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw DataError("config: bad integer for " + key + ": '" + value + "'");
    }
}

inline void assign_config_value(const std::string& key, const std::string& value, uint64_t& out) {
    try {
        size_t pos = 0;
        out = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw DataError("config: bad integer for " + key + ": '" + value + "'");
    }
}

inline void assign_config_value(const std::string& key, const std::string& value, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw DataError("config: bad number for " + key + ": '" + value + "'");
    }
}

inline void assign_config_value(const std::string&, const std::string& value, std::string& out) {
    out = value;
}

inline std::string format_config_value(int v) { return std::to_string(v); }
inline std::string format_config_value(uint64_t v) { return std::to_string(v); }
inline std::string format_config_value(const std::string& v) { return v; }
inline std::string format_config_value(double v) {
    // Shortest round-trip representation keeps the snapshot canonical.
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// Applies key=value lines onto a config. '#' starts a comment. Unknown keys
// and malformed values raise DataError.
inline void apply_config_text(Config& config, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config: line " + std::to_string(line_no) + " has no '='");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        bool matched = false;
        detail::for_each_config_field(config, [&](const char* name, auto& field) {
            if (key == name) {
                detail::assign_config_value(key, value, field);
                matched = true;
            }
        });
        if (!matched) throw DataError("config: unknown key '" + key + "'");
    }
    if (config.prob_normalization != "max" && config.prob_normalization != "count")
        throw DataError("config: probmap.normalization must be 'max' or 'count'");
}

// Canonical snapshot: one key=value per line in declaration order.
inline std::string config_to_text(const Config& config) {
    std::string out;
    detail::for_each_config_field(const_cast<Config&>(config), [&](const char* name, auto& field) {
        out += name;
        out += '=';
        out += detail::format_config_value(field);
        out += '\n';
    });
    return out;
}

}  // namespace tinyod
