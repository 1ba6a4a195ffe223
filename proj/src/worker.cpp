#include "stc/worker.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include "json.hpp"
#include <poll.h>
#include <set>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>
#include <unordered_map>

#include "stc/error.hpp"

namespace stc {

using json = nlohmann::json;

void ExternalClassifierConfig::validate() const {
  if (command.empty()) throw Error(Errc::BadConfig, "external classifier needs a worker command");
  if (epochs_per_iteration < 1) throw Error(Errc::BadConfig, "epochs_per_iteration must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(Errc::BadConfig, "learning_rate must be > 0");
  if (!(timeout_s > 0.0)) throw Error(Errc::BadConfig, "timeout_s must be > 0");
}

// ---------------------------------------------------------------- process

namespace {

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
  return "status " + std::to_string(status);
}

}  // namespace

WorkerProcess::WorkerProcess(const std::string& command, double timeout_s) : timeout_s_(timeout_s) {
  // A worker that dies mid-request must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
  int down[2], up[2];
  if (pipe(down) != 0) throw Error(Errc::WorkerExit, std::string("pipe: ") + std::strerror(errno));
  if (pipe(up) != 0) {
    close(down[0]);
    close(down[1]);
    throw Error(Errc::WorkerExit, std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw Error(Errc::WorkerExit, std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    // Own process group, so teardown reaches whatever the shell spawns.
    setpgid(0, 0);
    dup2(down[0], STDIN_FILENO);
    dup2(up[1], STDOUT_FILENO);
    close(down[0]);
    close(down[1]);
    close(up[0]);
    close(up[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid_, pid_);
  group_ = pid_;
  close(down[0]);
  close(up[1]);
  to_child_ = down[1];
  from_child_ = up[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

WorkerProcess::~WorkerProcess() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  // Give the worker a moment to exit on EOF before killing its group.
  bool reaped = pid_ <= 0;
  for (int i = 0; i < 50 && !reaped; ++i) {
    int status = 0;
    reaped = waitpid(pid_, &status, WNOHANG) == pid_;
    if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  if (group_ > 0) kill(-group_, SIGKILL);
  if (!reaped) waitpid(pid_, nullptr, 0);
}

void WorkerProcess::fail_exited(const std::string& context) {
  close(to_child_);
  to_child_ = -1;
  int status = 0;
  std::string how = "closed its output";
  for (int i = 0; i < 100; ++i) {
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      how = describe_status(status);
      pid_ = -1;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  throw Error(Errc::WorkerExit, "worker " + how + " " + context);
}

void WorkerProcess::write_line(const std::string& line) {
  std::string data = line + '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t w = write(to_child_, data.data() + off, data.size() - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      fail_exited("while receiving a request");
    }
    off += static_cast<std::size_t>(w);
  }
}

std::string WorkerProcess::read_line() {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration<double>(timeout_s_);
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (left <= 0) throw Error(Errc::WorkerTimeout, "worker did not answer within " + std::to_string(timeout_s_) + " s");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::WorkerExit, std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t r = read(from_child_, chunk, sizeof chunk);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::WorkerExit, std::string("read: ") + std::strerror(errno));
    }
    if (r == 0) fail_exited("before answering");
    buffer_.append(chunk, static_cast<std::size_t>(r));
  }
}

std::string WorkerProcess::request(const std::string& line) {
  write_line(line);
  return read_line();
}

void WorkerProcess::shutdown() {
  if (to_child_ < 0) return;
  write_line(json{{"cmd", "shutdown"}}.dump());
  close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration<double>(std::min(timeout_s_, 30.0));
    int status = 0;
    while (clock::now() < deadline) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        if (!(WIFEXITED(status) && WEXITSTATUS(status) == 0)) {
          throw Error(Errc::WorkerExit, "worker ended with " + describe_status(status) + " after shutdown");
        }
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    throw Error(Errc::WorkerTimeout, "worker did not exit after shutdown");
  }
}

// ---------------------------------------------------------------- protocol

std::string make_hello(int num_classes) {
  return json{{"cmd", "hello"}, {"protocol", 1}, {"num_classes", num_classes}}.dump();
}

std::string make_train_predict(const ExternalClassifierConfig& cfg, int iteration, const std::vector<LabeledText>& train,
                               const std::vector<UnlabeledText>& test) {
  json train_arr = json::array();
  for (const auto& t : train) train_arr.push_back({{"id", t.id}, {"text", t.text}, {"label", t.label}});
  json test_arr = json::array();
  for (const auto& t : test) test_arr.push_back({{"id", t.id}, {"text", t.text}});
  json msg = {{"cmd", "train_predict"},
              {"iteration", iteration},
              {"reset_weights", cfg.reset_weights},
              {"hyper", {{"epochs", cfg.epochs_per_iteration}, {"learning_rate", cfg.learning_rate}}},
              {"train", std::move(train_arr)},
              {"test", std::move(test_arr)}};
  // Invalid UTF-8 in corpus text is replaced rather than aborting the run.
  return msg.dump(-1, ' ', false, json::error_handler_t::replace);
}

namespace {

json parse_response(const std::string& line) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::WorkerMalformed, std::string("worker sent invalid JSON: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("status") || !msg["status"].is_string()) {
    throw Error(Errc::WorkerMalformed, "worker response lacks a status field");
  }
  const auto status = msg["status"].get<std::string>();
  if (status == "error") {
    const std::string message = msg.contains("message") && msg["message"].is_string() ? msg["message"].get<std::string>() : "";
    throw Error(Errc::WorkerReported, "worker reported an error: " + message);
  }
  if (status != "ok") throw Error(Errc::WorkerMalformed, "unknown worker status '" + status + "'");
  return msg;
}

}  // namespace

std::vector<Prediction> parse_predictions(const std::string& response, const std::vector<UnlabeledText>& test,
                                          int num_classes) {
  const json msg = parse_response(response);
  if (!msg.contains("predictions") || !msg["predictions"].is_array()) {
    throw Error(Errc::WorkerMalformed, "worker response lacks a predictions array");
  }
  std::unordered_map<int, std::size_t> position;
  for (std::size_t i = 0; i < test.size(); ++i) position.emplace(test[i].id, i);
  std::vector<int> labels(test.size(), -1);
  for (const auto& p : msg["predictions"]) {
    if (!p.is_object() || !p.contains("id") || !p.contains("label") || !p["id"].is_number_integer() ||
        !p["label"].is_number_integer()) {
      throw Error(Errc::WorkerMalformed, "prediction entries need integer id and label");
    }
    const int id = p["id"].get<int>();
    const int label = p["label"].get<int>();
    auto it = position.find(id);
    if (it == position.end()) throw Error(Errc::WorkerMalformed, "prediction for unknown id " + std::to_string(id));
    if (labels[it->second] >= 0) throw Error(Errc::WorkerMalformed, "duplicate prediction for id " + std::to_string(id));
    if (label < 0 || label >= num_classes) {
      throw Error(Errc::WorkerMalformed, "predicted label " + std::to_string(label) + " outside [0, " +
                                             std::to_string(num_classes) + ")");
    }
    labels[it->second] = label;
  }
  std::vector<Prediction> out;
  out.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (labels[i] < 0) throw Error(Errc::IncompleteResponse, "IncompleteResponse: no prediction for id " + std::to_string(test[i].id));
    out.push_back({test[i].id, labels[i]});
  }
  return out;
}

ExternalClassifier::ExternalClassifier(ExternalClassifierConfig cfg, int num_classes)
    : cfg_((cfg.validate(), std::move(cfg))), num_classes_(num_classes), process_(cfg_.command, cfg_.timeout_s) {
  parse_response(process_.request(make_hello(num_classes_)));
}

ExternalClassifier::~ExternalClassifier() {
  if (closed_) return;
  try {
    process_.shutdown();
  } catch (const Error&) {
    // Already failing or torn down; the process destructor reaps the child.
  }
}

std::vector<Prediction> ExternalClassifier::train_predict(const std::vector<LabeledText>& train,
                                                          const std::vector<UnlabeledText>& test, int iteration) {
  return parse_predictions(process_.request(make_train_predict(cfg_, iteration, train, test)), test, num_classes_);
}

void ExternalClassifier::shutdown() {
  closed_ = true;
  process_.shutdown();
}

}  // namespace stc
