#pragma once

#include <string>
#include <sys/types.h>
#include <vector>

namespace stc {

struct ExternalClassifierConfig {
  std::string command;  // run through /bin/sh -c
  int epochs_per_iteration = 2;
  double learning_rate = 3e-5;
  // true: the worker re-initializes its parameters on every request;
  // false: it resumes from the previous iteration (warm start).
  bool reset_weights = true;
  double timeout_s = 3600.0;

  void validate() const;
};

// A child process speaking newline-delimited JSON on stdin/stdout. One
// request is in flight at a time.
class WorkerProcess {
 public:
  explicit WorkerProcess(const std::string& command, double timeout_s);
  ~WorkerProcess();

  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  // Sends one line and waits for one line back.
  std::string request(const std::string& line);
  // Sends the shutdown command and reaps the child.
  void shutdown();

 private:
  void write_line(const std::string& line);
  std::string read_line();
  [[noreturn]] void fail_exited(const std::string& context);

  pid_t pid_ = -1;
  pid_t group_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  double timeout_s_;
  std::string buffer_;
};

struct LabeledText {
  int id = 0;
  std::string text;
  int label = 0;
};

struct UnlabeledText {
  int id = 0;
  std::string text;
};

struct Prediction {
  int id = 0;
  int label = 0;
};

// Owns a persistent worker for the duration of an enhancement run so warm
// starts carry across iterations.
class ExternalClassifier {
 public:
  // Launches the worker and performs the hello handshake.
  ExternalClassifier(ExternalClassifierConfig cfg, int num_classes);
  ~ExternalClassifier();

  ExternalClassifier(const ExternalClassifier&) = delete;
  ExternalClassifier& operator=(const ExternalClassifier&) = delete;

  // One train_predict round trip; returns predictions in the order of `test`.
  std::vector<Prediction> train_predict(const std::vector<LabeledText>& train, const std::vector<UnlabeledText>& test,
                                        int iteration);
  void shutdown();

  const ExternalClassifierConfig& config() const { return cfg_; }

 private:
  ExternalClassifierConfig cfg_;
  int num_classes_;
  WorkerProcess process_;
  bool closed_ = false;
};

// Protocol messages, exposed for tests and alternative transports.
std::string make_hello(int num_classes);
std::string make_train_predict(const ExternalClassifierConfig& cfg, int iteration, const std::vector<LabeledText>& train,
                               const std::vector<UnlabeledText>& test);
// Validates a train_predict response against the request's test ids.
std::vector<Prediction> parse_predictions(const std::string& response, const std::vector<UnlabeledText>& test,
                                          int num_classes);

}  // namespace stc
