#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hallq/hallq.h"

namespace {

struct Args {
    std::string config;
    std::string out;
    int workers = 1;
    std::vector<std::string> overrides;
};

// Takes ownership of a library string.
std::string take(char* s) {
    std::string out = s ? s : "";
    hq_string_free(s);
    return out;
}

int report_error(hq_status st) {
    std::cerr << "error: " << hq_last_error() << "\n";
    return st == HQ_ERR_NUMERICAL ? 3 : 2;
}

int run(const std::string& experiment, const Args& a) {
    std::string text;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) {
            std::cerr << "error: cannot read config '" << a.config << "'\n";
            return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    std::vector<std::string> ov = a.overrides;
    ov.push_back("experiment=" + experiment);
    if (!a.out.empty()) ov.push_back("output.directory=" + a.out);
    std::vector<const char*> ptrs;
    for (const auto& o : ov) ptrs.push_back(o.c_str());

    char* resolved = nullptr;
    hq_status st = hq_config_resolve(text.c_str(), ptrs.data(), static_cast<int>(ptrs.size()), &resolved);
    if (st != HQ_OK) return report_error(st);
    const std::string cfg = take(resolved);

    char* record = nullptr;
    int code = 0;
    st = hq_run(cfg.c_str(), nullptr, a.workers, &record, &code);
    if (st != HQ_OK) return report_error(st);
    const std::string rec = take(record);
    std::cout << rec << "\n";
    if (code != 0) std::cerr << experiment << " exited with " << code << ": " << hq_last_error() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hall conductance quantization experiments on small lattice models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hq_version()));

    Args args;
    const std::vector<std::pair<std::string, std::string>> experiments = {
        {"validate", "check a model against the locality and charge assumptions"},
        {"spectrum", "groundstate energy, gap and low levels at zero flux"},
        {"conductance", "Kubo curvature at flux points"},
        {"chern", "Chern number from plaquette phases on a flux grid"},
        {"loop-phase", "small-loop phases against the Kubo curvature"},
        {"stokes", "discrete Stokes decomposition of the big loop"},
        {"lemma-checks", "numerical checks of the supporting lemmas"},
        {"quantize", "end-to-end quantization report"}};
    for (const auto& [name, help] : experiments) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config, "JSON config file");
        sub->add_option("--out", args.out, "output directory");
        sub->add_option("--workers", args.workers, "thread cap")->check(CLI::PositiveNumber);
        sub->add_option("--override", args.overrides, "key=value, dotted keys (repeatable)");
        sub->callback([&, name = name] { throw CLI::RuntimeError(run(name, args)); });
    }

    std::string report_dir;
    CLI::App* rep = app.add_subcommand("report", "summarize the records in a results directory");
    rep->add_option("--out,dir", report_dir, "results directory")->required();
    rep->callback([&] {
        char* table = nullptr;
        int attention = 0;
        const hq_status st = hq_report(report_dir.c_str(), &table, &attention);
        if (st != HQ_OK) throw CLI::RuntimeError(report_error(st));
        std::cout << take(table);
    });

    CLI::App* def = app.add_subcommand("defaults", "print the embedded default config");
    def->callback([] {
        char* s = nullptr;
        const hq_status st = hq_config_defaults(&s);
        if (st != HQ_OK) throw CLI::RuntimeError(report_error(st));
        std::cout << take(s) << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return 0;
}
