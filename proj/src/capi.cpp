#include "freqcast.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "freqcast/commands.hpp"
#include "freqcast/config.hpp"

struct fqc_config {
    freqcast::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

fqc_status fail(fqc_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

fqc_status require(bool ok, const char* what) {
    return ok ? FQC_OK : fail(FQC_ERR_INVALID_ARGUMENT, std::string("null argument: ") + what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
fqc_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const freqcast::IoError& e) {
        return fail(FQC_ERR_IO, e.what());
    } catch (const freqcast::ParseError& e) {
        return fail(FQC_ERR_PARSE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(FQC_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(FQC_ERR_INTERNAL, e.what());
    }
}

} // namespace

extern "C" {

const char* fqc_version(void) { return "0.1.0"; }

const char* fqc_last_error(void) { return g_last_error.c_str(); }

fqc_status fqc_config_default(fqc_config** out) {
    if (fqc_status s = require(out != nullptr, "out")) return s;
    return guarded([&] {
        *out = new fqc_config{};
        return FQC_OK;
    });
}

fqc_status fqc_config_load(const char* path, fqc_config** out) {
    if (fqc_status s = require(path != nullptr, "path")) return s;
    if (fqc_status s = require(out != nullptr, "out")) return s;
    return guarded([&]() -> fqc_status {
        if (!std::filesystem::exists(path))
            return fail(FQC_ERR_IO, std::string("config: cannot open file: ") + path);
        *out = new fqc_config{freqcast::RunConfig::load(path)};
        return FQC_OK;
    });
}

fqc_status fqc_config_from_json(const char* json_text, fqc_config** out) {
    if (fqc_status s = require(json_text != nullptr, "json_text")) return s;
    if (fqc_status s = require(out != nullptr, "out")) return s;
    return guarded([&] {
        *out = new fqc_config{freqcast::RunConfig::from_json_text(json_text)};
        return FQC_OK;
    });
}

void fqc_config_free(fqc_config* cfg) { delete cfg; }

fqc_status fqc_config_set_out_dir(fqc_config* cfg, const char* dir) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (fqc_status s = require(dir != nullptr, "dir")) return s;
    if (dir[0] == '\0') return fail(FQC_ERR_INVALID_ARGUMENT, "out_dir must not be empty");
    cfg->cfg.out_dir = dir;
    return FQC_OK;
}

fqc_status fqc_config_set_seeds(fqc_config* cfg, const uint64_t* seeds, size_t n_seeds) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (fqc_status s = require(seeds != nullptr, "seeds")) return s;
    if (n_seeds == 0) return fail(FQC_ERR_INVALID_ARGUMENT, "seeds must not be empty");
    cfg->cfg.seeds.assign(seeds, seeds + n_seeds);
    return FQC_OK;
}

fqc_status fqc_config_set_alpha(fqc_config* cfg, double alpha) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (!(alpha > 0.0)) return fail(FQC_ERR_INVALID_ARGUMENT, "alpha must be positive");
    cfg->cfg.alpha = alpha;
    return FQC_OK;
}

fqc_status fqc_config_set_detect_mode(fqc_config* cfg, const char* mode) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (fqc_status s = require(mode != nullptr, "mode")) return s;
    return guarded([&] {
        cfg->cfg.detect_mode = freqcast::detect_mode_from_name(mode);
        return FQC_OK;
    });
}

fqc_status fqc_config_set_path(fqc_config* cfg, const char* key, const char* value) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (fqc_status s = require(key != nullptr, "key")) return s;
    if (fqc_status s = require(value != nullptr, "value")) return s;
    const std::string k = key;
    if (k == "data") cfg->cfg.data_csv = value;
    else if (k == "checkpoint") cfg->cfg.checkpoint = value;
    else if (k == "truth") cfg->cfg.truth_csv = value;
    else if (k == "report") cfg->cfg.report_json = value;
    else if (k == "forecast") cfg->cfg.forecast_csv = value;
    else
        return fail(FQC_ERR_INVALID_ARGUMENT,
                    "unknown path key \"" + k +
                        "\"; expected data, checkpoint, truth, report or forecast");
    return FQC_OK;
}

fqc_status fqc_config_resolved_json(const fqc_config* cfg, char** out_json) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (fqc_status s = require(out_json != nullptr, "out_json")) return s;
    return guarded([&]() -> fqc_status {
        char* text = dup_string(cfg->cfg.resolved_json());
        if (!text) return fail(FQC_ERR_INTERNAL, "out of memory");
        *out_json = text;
        return FQC_OK;
    });
}

fqc_status fqc_run(const fqc_config* cfg, const char* command, char** out_summary) {
    if (fqc_status s = require(cfg != nullptr, "cfg")) return s;
    if (fqc_status s = require(command != nullptr, "command")) return s;
    return guarded([&]() -> fqc_status {
        const freqcast::CommandResult result = freqcast::run_command(cfg->cfg, command);
        if (out_summary) {
            char* text = dup_string(result.summary);
            if (!text) return fail(FQC_ERR_INTERNAL, "out of memory");
            *out_summary = text;
        }
        return FQC_OK;
    });
}

void fqc_string_free(char* s) { std::free(s); }

} // extern "C"
