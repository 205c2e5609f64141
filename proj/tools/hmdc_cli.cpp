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

// hmdc simulate --config <path> [--seed <u64>] [--out <csv>] [--scheme <list>] [--snr <list>]
//
// Writes <out> (CSV), <out>.manifest.json and <out>.report.txt, and prints the
// report on stdout.

#include "hmdc/hmdc.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace
{
    std::string utc_now()
    {
        const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    void write_text(const std::string &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        out << text;
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + path + "' failed");
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Link-level SER simulator for high-mobility massive MIMO uplink with Doppler compensation"};
    app.set_version_flag("--version", std::string(hmdc::tool_version));
    app.require_subcommand(1);

    auto *sim = app.add_subcommand("simulate", "Run an SNR sweep and write CSV, manifest and report");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path = "ser.csv";
    std::optional<std::string> scheme;
    std::optional<std::string> snr;
    unsigned threads = 0;
    std::optional<std::string> timestamp;
    sim->add_option("--config", config_path, "Key/value configuration file")->required();
    sim->add_option("--seed", seed, "Master seed (overrides the file)");
    sim->add_option("--out", out_path, "CSV output path")->capture_default_str();
    sim->add_option("--scheme", scheme, "Scheme or comma list: ssd_dc, alamouti_dc, nodiv_dc");
    sim->add_option("--snr", snr, "Comma-separated SNR grid in dB");
    sim->add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");
    sim->add_option("--timestamp", timestamp, "Manifest timestamp (default: current UTC time)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        hmdc::SimConfig config = hmdc::parse_config(config_path);
        if (seed)
            config.seed = *seed;
        if (scheme)
            config.schemes = hmdc::parse_scheme_list(*scheme, "--scheme");
        if (snr)
            config.snr_db = hmdc::parse_snr_list(*snr, "--snr");
        hmdc::validate_config(config);

        hmdc::RunOptions options;
        options.threads = threads;
        const hmdc::SweepResult result = hmdc::run_sweep(config, options);

        hmdc::emit_csv(result, out_path);
        hmdc::RunManifest manifest{config, hmdc::tool_version, config.seed, timestamp.value_or(utc_now())};
        write_text(out_path + ".manifest.json", hmdc::manifest_json(manifest));
        const std::string report = hmdc::emit_report(result);
        write_text(out_path + ".report.txt", report);
        std::cout << report;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
