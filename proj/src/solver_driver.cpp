// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "specforge/smt.hpp"

namespace specforge::smt {

namespace {

struct TempScript {
  std::filesystem::path path;
  ~TempScript() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

std::string read_with_timeout(int fd, pid_t pid, int timeout_seconds) {
  std::string out;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::seconds(timeout_seconds);
  char buf[4096];
  for (;;) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                         deadline - std::chrono::steady_clock::now())
                         .count();
    if (remaining <= 0) {
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      throw SolverError("solver timed out after " +
                        std::to_string(timeout_seconds) + "s");
    }
    struct pollfd pfd = {fd, POLLIN, 0};
    int rc = poll(&pfd, 1, static_cast<int>(remaining));
    if (rc < 0) {
      if (errno == EINTR) continue;
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      throw SolverError("poll failed while reading solver output");
    }
    if (rc == 0) continue;
    ssize_t n = read(fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SolverError("read failed while reading solver output");
    }
    if (n == 0) break;  // EOF
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

// Minimal s-expression scan of solver output for (define-fun name () sort
// value) entries, tolerant of z3/cvc5 wrapping differences.
void parse_model_text(const std::string& text,
                      std::map<std::string, Word>& model) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  };
  auto token = [&]() -> std::string {
    skip_ws();
    if (pos >= text.size()) return "";
    if (text[pos] == '(' || text[pos] == ')') return std::string(1, text[pos++]);
    std::size_t j = pos;
    while (j < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[j])) &&
           text[j] != '(' && text[j] != ')')
      ++j;
    std::string t = text.substr(pos, j - pos);
    pos = j;
    return t;
  };
  std::vector<std::string> toks;
  for (std::string t = token(); !t.empty(); t = token()) toks.push_back(t);

  for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
    if (toks[i] != "define-fun") continue;
    const std::string& name = toks[i + 1];
    // Find the value: the last literal token before the closing paren of
    // this define-fun. Scan forward tracking depth.
    int depth = 1;  // we are inside the ( that preceded define-fun
    std::string value_tok;
    std::vector<std::string> tail;
    std::size_t j = i + 2;
    for (; j < toks.size() && depth > 0; ++j) {
      if (toks[j] == "(") ++depth;
      else if (toks[j] == ")") --depth;
      else tail.push_back(toks[j]);
    }
    if (tail.empty()) continue;
    // Value forms: #x.., #b.., true, false, or `_ bvN w` at the tail.
    Word value = 0;
    bool have = false;
    const std::string& last = tail.back();
    if (last.rfind("#x", 0) == 0) {
      value = std::stoull(last.substr(2), nullptr, 16);
      have = true;
    } else if (last.rfind("#b", 0) == 0) {
      value = std::stoull(last.substr(2), nullptr, 2);
      have = true;
    } else if (last == "true") {
      value = 1;
      have = true;
    } else if (last == "false") {
      value = 0;
      have = true;
    } else if (tail.size() >= 2 && tail[tail.size() - 2].rfind("bv", 0) == 0) {
      value = std::stoull(tail[tail.size() - 2].substr(2));
      have = true;
    }
    if (have) model[name] = value;
    i = j - 1;
  }
}

}  // namespace

SmtResult run_external_solver(const std::vector<std::string>& argv,
                              const std::string& script, int timeout_seconds,
                              const std::string& work_dir) {
  if (argv.empty()) throw SolverError("empty solver command");

  std::filesystem::path dir =
      work_dir.empty() ? std::filesystem::temp_directory_path()
                       : std::filesystem::path(work_dir);
  std::filesystem::create_directories(dir);
  std::string tmpl = (dir / "specforge-XXXXXX.smt2").string();
  std::vector<char> name(tmpl.begin(), tmpl.end());
  name.push_back('\0');
  int sfd = mkstemps(name.data(), 5);
  if (sfd < 0) throw SolverError("cannot create solver script file");
  TempScript tmp{std::filesystem::path(name.data())};
  {
    ssize_t off = 0;
    while (off < static_cast<ssize_t>(script.size())) {
      ssize_t n = write(sfd, script.data() + off, script.size() - off);
      if (n < 0) {
        close(sfd);
        throw SolverError("cannot write solver script file");
      }
      off += n;
    }
    close(sfd);
  }

  int pipefd[2];
  if (pipe(pipefd) != 0) throw SolverError("pipe failed");
  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    throw SolverError("fork failed");
  }
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(name.data());
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(pipefd[1]);
  std::string output;
  try {
    output = read_with_timeout(pipefd[0], pid, timeout_seconds);
  } catch (...) {
    close(pipefd[0]);
    throw;
  }
  close(pipefd[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
    throw SolverError("cannot execute solver: " + argv[0]);

  SmtResult result;
  std::istringstream lines(output);
  std::string line;
  bool have_status = false;
  while (std::getline(lines, line)) {
    std::string t;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t == "sat") {
      result.status = SatStatus::Sat;
      have_status = true;
      break;
    }
    if (t == "unsat") {
      result.status = SatStatus::Unsat;
      have_status = true;
      break;
    }
    if (t == "unknown") {
      result.status = SatStatus::Unknown;
      have_status = true;
      break;
    }
  }
  if (!have_status) {
    std::string snippet = output.substr(0, 200);
    throw SolverError("solver produced no sat/unsat answer: " + snippet);
  }
  if (result.status == SatStatus::Sat) parse_model_text(output, result.model);
  return result;
}

}  // namespace specforge::smt
