#pragma once

// Runs the platekeeper CLI as a child process and captures its output.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "support/test_util.hpp"

extern char** environ;

namespace pktest {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

/// Runs `platekeeper <args>` to completion. `env` entries are NAME=value prefixes.
inline RunResult run_cli(const std::vector<std::string>& args, const std::string& env = "") {
    TempDir io;
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += shell_quote(PK_CLI_PATH);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " >" + shell_quote((io / "out").string()) + " 2>" + shell_quote((io / "err").string());
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(io / "out");
    r.err = slurp(io / "err");
    return r;
}

/// Background `platekeeper serve` on a free port; stopped with SIGTERM.
class ServeProcess {
public:
    ServeProcess(const fs::path& store, const fs::path& policy) {
        err_path_ = dir_ / "err";
        std::vector<std::string> args{PK_CLI_PATH, "serve", "--store", store.string(), "--listen", "127.0.0.1:0",
                                      "--policy", policy.string()};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_addopen(&actions, 2, err_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        posix_spawn(&pid_, PK_CLI_PATH, &actions, nullptr, argv.data(), environ);
        posix_spawn_file_actions_destroy(&actions);
        auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
        while (std::chrono::steady_clock::now() < deadline) {
            auto text = slurp(err_path_);
            auto pos = text.find("listening on 127.0.0.1:");
            if (pos != std::string::npos && text.find('\n', pos) != std::string::npos) {
                port_ = std::stoi(text.substr(pos + 23));
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }

    ~ServeProcess() { stop(); }

    int port() const { return port_; }

    /// Sends SIGTERM and returns the exit code.
    int stop() {
        if (pid_ <= 0) return exit_code_;
        ::kill(pid_, SIGTERM);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        return exit_code_;
    }

private:
    TempDir dir_;
    fs::path err_path_;
    pid_t pid_ = -1;
    int port_ = 0;
    int exit_code_ = -1;
};

}  // namespace pktest
