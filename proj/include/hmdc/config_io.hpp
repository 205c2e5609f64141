// SPDX-License-Identifier: Apache-2.0
//
// hmdc - link-level simulator for high-mobility massive MIMO uplink
// transmission with angle-domain Doppler compensation
// Copyright (C) 2026 The hmdc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Text front end: flat key/value run configuration, CSV results, the run
// manifest and the human-readable report.
//
// Config file syntax: one `key = value` per line, `#` starts a comment, values
// may be wrapped in double quotes, lists are comma separated. Keys:
//
//   scheme          ssd_dc | alamouti_dc | nodiv_dc, or a comma list of them
//   m               antennas, 1..4096
//   spacing         normalized antenna spacing, (0, 1]
//   q               beams, 1..1024 (alamouti_dc needs >= 2)
//   k               SSD blocks per codeword, 1..6
//   j               data symbols per block, 1..1048576
//   np              pilot length, 1..65536
//   mode            ideal | aligned | continuum
//   paths           continuum path count, 1..65536
//   aod_density     uniform_angle | uniform_cosine
//   carrier_hz      > 0
//   speed_mps       >= 0
//   symbol_rate_hz  > 0
//   snr_db_list     comma list of finite values
//   seed            unsigned 64-bit integer
//   max_trials      >= 1 frames per SNR point
//   target_errors   >= 1 symbol errors per SNR point
//   csi             estimated | perfect
//   weights         comma list of m real antenna weights

#include "hmdc/sim_engine.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace hmdc
{
    inline constexpr const char *tool_name = "hmdc";
    inline constexpr const char *tool_version = "1.0.0";

    class config_error : public std::runtime_error
    {
    public:
        config_error(const std::string &key, const std::string &what)
            : std::runtime_error(key.empty() ? what : "config key '" + key + "': " + what), key_(key)
        {
        }
        const std::string &key() const { return key_; }

    private:
        std::string key_;
    };

    namespace detail
    {
        inline std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return std::string(s.substr(b, e - b + 1));
        }

        inline std::string unquote(std::string s)
        {
            if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
                s = s.substr(1, s.size() - 2);
            return trim(s);
        }

        inline std::vector<std::string> split_list(const std::string &s)
        {
            std::vector<std::string> out;
            std::string item;
            std::istringstream in(s);
            while (std::getline(in, item, ','))
                out.push_back(trim(item));
            return out;
        }

        inline double parse_double(const std::string &key, const std::string &text)
        {
            double v = 0.0;
            const auto *first = text.data();
            const auto *last = text.data() + text.size();
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (text.empty() || ec != std::errc() || ptr != last)
                throw config_error(key, "'" + text + "' is not a number");
            if (!std::isfinite(v))
                throw config_error(key, "value must be finite");
            return v;
        }

        inline std::uint64_t parse_uint(const std::string &key, const std::string &text)
        {
            std::uint64_t v = 0;
            const auto *first = text.data();
            const auto *last = text.data() + text.size();
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (text.empty() || ec != std::errc() || ptr != last)
                throw config_error(key, "'" + text + "' is not a non-negative integer");
            return v;
        }

        inline std::size_t parse_count(const std::string &key, const std::string &text, std::uint64_t lo,
                                       std::uint64_t hi)
        {
            const auto v = parse_uint(key, text);
            if (v < lo || v > hi)
                throw config_error(key, "value " + text + " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
            return std::size_t(v);
        }

        inline Scheme parse_scheme(const std::string &key, const std::string &text)
        {
            if (text == "ssd_dc")
                return Scheme::ssd_dc;
            if (text == "alamouti_dc")
                return Scheme::alamouti_dc;
            if (text == "nodiv_dc")
                return Scheme::nodiv_dc;
            throw config_error(key, "unknown scheme '" + text + "' (expected ssd_dc, alamouti_dc or nodiv_dc)");
        }
    }

    inline std::vector<Scheme> parse_scheme_list(const std::string &text, const std::string &key = "scheme")
    {
        std::vector<Scheme> out;
        for (const auto &item : detail::split_list(text))
        {
            const Scheme s = detail::parse_scheme(key, item);
            if (std::find(out.begin(), out.end(), s) != out.end())
                throw config_error(key, "scheme '" + item + "' listed twice");
            out.push_back(s);
        }
        if (out.empty())
            throw config_error(key, "empty scheme list");
        return out;
    }

    inline std::vector<double> parse_snr_list(const std::string &text, const std::string &key = "snr_db_list")
    {
        std::vector<double> out;
        for (const auto &item : detail::split_list(text))
            out.push_back(detail::parse_double(key, item));
        if (out.empty())
            throw config_error(key, "empty SNR list");
        for (double s : out)
            if (s > max_snr_db)
                throw config_error(key, "SNR values above " + std::to_string(int(max_snr_db)) + " dB are not supported");
        return out;
    }

    // Applies one key; `config` keeps its previous value for every other field
    inline void apply_config_key(SimConfig &config, const std::string &key, const std::string &value)
    {
        using namespace detail;
        if (key == "scheme")
            config.schemes = parse_scheme_list(value, key);
        else if (key == "m")
            config.num_antennas = parse_count(key, value, 1, 4096);
        else if (key == "spacing")
        {
            config.spacing = parse_double(key, value);
            if (!(config.spacing > 0.0 && config.spacing <= 1.0))
                throw config_error(key, "value must lie in (0, 1]");
        }
        else if (key == "q")
            config.num_beams = parse_count(key, value, 1, 1024);
        else if (key == "k")
            config.num_blocks = parse_count(key, value, 1, max_ssd_block);
        else if (key == "j")
            config.block_data = parse_count(key, value, 1, 1u << 20);
        else if (key == "np")
            config.pilot_length = parse_count(key, value, 1, 1u << 16);
        else if (key == "mode")
        {
            if (value == "ideal")
                config.mode = PropagationMode::ideal;
            else if (value == "aligned")
                config.mode = PropagationMode::aligned;
            else if (value == "continuum")
                config.mode = PropagationMode::continuum;
            else
                throw config_error(key, "unknown mode '" + value + "' (expected ideal, aligned or continuum)");
        }
        else if (key == "paths")
            config.num_paths = parse_count(key, value, 1, 1u << 16);
        else if (key == "aod_density")
        {
            if (value == "uniform_angle")
                config.aod_density = AodDensity::uniform_angle;
            else if (value == "uniform_cosine")
                config.aod_density = AodDensity::uniform_cosine;
            else
                throw config_error(key, "unknown density '" + value + "' (expected uniform_angle or uniform_cosine)");
        }
        else if (key == "carrier_hz")
        {
            config.carrier_hz = parse_double(key, value);
            if (!(config.carrier_hz > 0.0))
                throw config_error(key, "value must be positive");
        }
        else if (key == "speed_mps")
        {
            config.speed_mps = parse_double(key, value);
            if (!(config.speed_mps >= 0.0))
                throw config_error(key, "value must be non-negative");
        }
        else if (key == "symbol_rate_hz")
        {
            config.symbol_rate_hz = parse_double(key, value);
            if (!(config.symbol_rate_hz > 0.0))
                throw config_error(key, "value must be positive");
        }
        else if (key == "snr_db_list")
            config.snr_db = parse_snr_list(value, key);
        else if (key == "seed")
            config.seed = parse_uint(key, value);
        else if (key == "max_trials")
            config.policy.max_trials = parse_count(key, value, 1, std::uint64_t(1) << 40);
        else if (key == "target_errors")
            config.policy.target_errors = parse_count(key, value, 1, std::uint64_t(1) << 40);
        else if (key == "csi")
        {
            if (value == "estimated")
                config.csi = CsiMode::estimated;
            else if (value == "perfect")
                config.csi = CsiMode::perfect;
            else
                throw config_error(key, "unknown CSI mode '" + value + "' (expected estimated or perfect)");
        }
        else if (key == "weights")
        {
            config.weights.clear();
            for (const auto &item : split_list(value))
                config.weights.push_back(parse_double(key, item));
        }
        else
            throw config_error(key, "unknown key");
    }

    // Cross-field checks, reported against the key that has to change
    inline void validate_config(const SimConfig &config)
    {
        try
        {
            config.validate();
        }
        catch (const std::invalid_argument &e)
        {
            const std::string msg = e.what();
            const auto colon = msg.find(':');
            const std::string key = colon == std::string::npos ? std::string{} : msg.substr(0, colon);
            throw config_error(key, colon == std::string::npos ? msg : detail::trim(msg.substr(colon + 1)));
        }
    }

    inline SimConfig parse_config_text(std::string_view text)
    {
        SimConfig config;
        std::set<std::string> seen;
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error("", "line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::unquote(detail::trim(line.substr(eq + 1)));
            if (key.empty())
                throw config_error("", "line " + std::to_string(line_no) + ": missing key");
            if (!seen.insert(key).second)
                throw config_error(key, "given more than once");
            apply_config_key(config, key, value);
        }
        validate_config(config);
        return config;
    }

    inline SimConfig parse_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_config_text(buf.str());
    }

    // Shortest decimal text that reads back to the same double
    inline std::string format_decimal(double v)
    {
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    }

    // d.dddddde<exp> with an unpadded exponent, e.g. 1.234560e-4, 0.000000e0
    inline std::string format_scientific(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6e", v);
        std::string s(buf);
        const auto e = s.find('e');
        const int exponent = std::stoi(s.substr(e + 1));
        return s.substr(0, e + 1) + std::to_string(exponent);
    }

    inline constexpr const char *csv_header = "scheme,snr_db,trials,symbols,errors,ser,ser_stderr";

    inline void emit_csv(const SweepResult &result, std::ostream &out)
    {
        out << csv_header << '\n';
        for (const auto &p : result.points)
            out << p.scheme << ',' << format_decimal(p.snr_db) << ',' << p.trials << ',' << p.symbols << ','
                << p.errors << ',' << format_scientific(p.ser) << ',' << format_scientific(p.ser_stderr) << '\n';
    }

    inline std::string emit_csv(const SweepResult &result)
    {
        std::ostringstream out;
        emit_csv(result, out);
        return out.str();
    }

    inline void emit_csv(const SweepResult &result, const std::string &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        emit_csv(result, out);
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + path + "' failed");
    }

    // Reads points back from emit_csv output. Fits are not stored in the CSV.
    inline SweepResult read_csv(std::istream &in)
    {
        SweepResult result;
        std::string line;
        if (!std::getline(in, line) || line != csv_header)
            throw std::runtime_error("read_csv: missing or unexpected header");
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto f = detail::split_list(line);
            if (f.size() != 7)
                throw std::runtime_error("read_csv: expected 7 fields in '" + line + "'");
            SerPoint p;
            p.scheme = f[0];
            p.snr_db = detail::parse_double("snr_db", f[1]);
            p.trials = detail::parse_uint("trials", f[2]);
            p.symbols = detail::parse_uint("symbols", f[3]);
            p.errors = detail::parse_uint("errors", f[4]);
            p.ser = std::stod(f[5]);
            p.ser_stderr = std::stod(f[6]);
            result.points.push_back(p);
        }
        return result;
    }

    struct RunManifest
    {
        SimConfig config;
        std::string tool_version = hmdc::tool_version;
        std::uint64_t seed = 0;
        std::string timestamp; // ISO-8601 UTC
    };

    inline nlohmann::ordered_json config_to_json(const SimConfig &c)
    {
        nlohmann::ordered_json j;
        std::vector<std::string> schemes;
        for (auto s : c.schemes)
            schemes.emplace_back(to_string(s));
        j["scheme"] = schemes;
        j["m"] = c.num_antennas;
        j["spacing"] = c.spacing;
        j["q"] = c.num_beams;
        j["k"] = c.num_blocks;
        j["j"] = c.block_data;
        j["np"] = c.pilot_length;
        j["mode"] = std::string(to_string(c.mode));
        j["paths"] = c.num_paths;
        j["aod_density"] = std::string(to_string(c.aod_density));
        j["carrier_hz"] = c.carrier_hz;
        j["speed_mps"] = c.speed_mps;
        j["symbol_rate_hz"] = c.symbol_rate_hz;
        j["snr_db_list"] = c.snr_db;
        j["seed"] = c.seed;
        j["max_trials"] = c.policy.max_trials;
        j["target_errors"] = c.policy.target_errors;
        j["csi"] = std::string(to_string(c.csi));
        j["weights"] = c.weights;
        j["derived"] = {{"max_doppler_hz", c.doppler().max_doppler_hz()},
                        {"symbol_interval_s", c.doppler().symbol_interval_s},
                        {"trial_batch", trial_batch}};
        return j;
    }

    inline std::string manifest_json(const RunManifest &m)
    {
        nlohmann::ordered_json j;
        j["tool"] = tool_name;
        j["tool_version"] = m.tool_version;
        j["seed"] = m.seed;
        j["timestamp"] = m.timestamp;
        j["config"] = config_to_json(m.config);
        return j.dump(2) + "\n";
    }

    // Rebuilds the configuration recorded in a manifest
    inline SimConfig config_from_manifest(const std::string &json_text)
    {
        const auto j = nlohmann::json::parse(json_text);
        const auto &c = j.at("config");
        SimConfig config;
        config.schemes.clear();
        for (const auto &s : c.at("scheme"))
            config.schemes.push_back(detail::parse_scheme("scheme", s.get<std::string>()));
        config.num_antennas = c.at("m").get<std::size_t>();
        config.spacing = c.at("spacing").get<double>();
        config.num_beams = c.at("q").get<std::size_t>();
        config.num_blocks = c.at("k").get<std::size_t>();
        config.block_data = c.at("j").get<std::size_t>();
        config.pilot_length = c.at("np").get<std::size_t>();
        apply_config_key(config, "mode", c.at("mode").get<std::string>());
        config.num_paths = c.at("paths").get<std::size_t>();
        apply_config_key(config, "aod_density", c.at("aod_density").get<std::string>());
        config.carrier_hz = c.at("carrier_hz").get<double>();
        config.speed_mps = c.at("speed_mps").get<double>();
        config.symbol_rate_hz = c.at("symbol_rate_hz").get<double>();
        config.snr_db = c.at("snr_db_list").get<std::vector<double>>();
        config.seed = c.at("seed").get<std::uint64_t>();
        config.policy.max_trials = c.at("max_trials").get<std::uint64_t>();
        config.policy.target_errors = c.at("target_errors").get<std::uint64_t>();
        apply_config_key(config, "csi", c.at("csi").get<std::string>());
        config.weights = c.at("weights").get<std::vector<double>>();
        validate_config(config);
        return config;
    }

    namespace detail
    {
        inline std::string fixed(double v, int digits)
        {
            std::ostringstream s;
            s << std::fixed << std::setprecision(digits) << v;
            return s.str();
        }
    }

    // Per-scheme SER table, fitted diversity orders and a comparison of the
    // schemes at the highest SNR they share
    inline std::string emit_report(const SweepResult &result)
    {
        std::ostringstream out;
        std::vector<std::string> schemes;
        for (const auto &p : result.points)
            if (std::find(schemes.begin(), schemes.end(), p.scheme) == schemes.end())
                schemes.push_back(p.scheme);

        for (const auto &scheme : schemes)
        {
            out << "== " << scheme << " ==\n";
            out << "  snr_db      trials       symbols    errors  ser           95% CI\n";
            for (const auto &p : result.points_for(scheme))
            {
                out << "  " << std::setw(6) << format_decimal(p.snr_db) << "  " << std::setw(10) << p.trials << "  "
                    << std::setw(12) << p.symbols << "  " << std::setw(8) << p.errors << "  " << std::setw(12)
                    << format_scientific(p.ser) << "  [" << format_scientific(p.ci_low()) << ", "
                    << format_scientific(p.ci_high()) << "]";
                if (!p.target_met)
                    out << "  (error-target not met)";
                out << '\n';
            }

            auto fit_it = std::find_if(result.fits.begin(), result.fits.end(),
                                       [&](const DiversityFit &f) { return f.scheme == scheme; });
            const DiversityFit fit = fit_it != result.fits.end() ? *fit_it : fit_scheme(result.points_for(scheme), scheme);
            const std::string window =
                "(window " + format_decimal(fit.window_low_db) + "–" + format_decimal(fit.window_high_db) + " dB)";
            if (fit.order)
                out << "  diversity order ≈ " << detail::fixed(*fit.order, 2) << " " << window << '\n';
            else
                out << "  diversity order: fit unavailable " << window << '\n';
        }

        if (schemes.size() >= 2)
        {
            // highest SNR present for every scheme
            std::optional<double> common;
            std::set<double> candidates;
            for (const auto &p : result.points)
                candidates.insert(p.snr_db);
            for (auto it = candidates.rbegin(); it != candidates.rend(); ++it)
            {
                const bool everywhere = std::all_of(schemes.begin(), schemes.end(),
                                                    [&](const std::string &s) { return result.find(s, *it) != nullptr; });
                if (everywhere)
                {
                    common = *it;
                    break;
                }
            }
            if (common)
            {
                std::vector<const SerPoint *> at;
                for (const auto &s : schemes)
                    at.push_back(result.find(s, *common));
                std::stable_sort(at.begin(), at.end(), [](const SerPoint *a, const SerPoint *b) { return a->ser < b->ser; });
                out << "== comparison at " << format_decimal(*common) << " dB ==\n";
                out << "  ordering by SER ascending:";
                for (std::size_t i = 0; i < at.size(); ++i)
                    out << (i == 0 ? " " : " < ") << at[i]->scheme << " (" << format_scientific(at[i]->ser) << ")";
                out << '\n';
                for (std::size_t a = 0; a < at.size(); ++a)
                    for (std::size_t b = a + 1; b < at.size(); ++b)
                    {
                        const bool separated = at[a]->ci_high() < at[b]->ci_low();
                        out << "  " << at[a]->scheme << " vs " << at[b]->scheme << ": ";
                        if (at[a]->ser > 0.0)
                            out << "SER ratio " << detail::fixed(at[b]->ser / at[a]->ser, 2);
                        else
                            out << "SER ratio undefined (zero errors)";
                        out << (separated ? ", 95% CIs disjoint" : ", 95% CIs overlap") << '\n';
                    }
            }
        }
        return out.str();
    }
}
