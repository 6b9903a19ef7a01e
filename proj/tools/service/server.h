// Copyright 2026 The gridclear Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trainee HTTP API. Requests are answered by MarketService, which owns the
// working case, a FIFO run queue served by one worker thread and the
// on-disk run records. Endpoints are documented in docs/http_api.md.

#ifndef GRIDCLEAR_TOOLS_SERVICE_SERVER_H_
#define GRIDCLEAR_TOOLS_SERVICE_SERVER_H_

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>

#include "gridclear/market_data.h"
#include "service.h"

namespace httplib {
class Server;
}

namespace gridclear::service {

struct Reply {
  int status = 200;
  std::string body;
};

class MarketService {
 public:
  // Run records live in `<data_dir>/runs`; records already there are
  // served as completed runs.
  MarketService(NetworkCase c, std::string case_path, std::string data_dir);
  ~MarketService();

  MarketService(const MarketService&) = delete;
  MarketService& operator=(const MarketService&) = delete;

  Reply Network() const;
  Reply Hour(int hour) const;  // 1-based
  Reply PostBids(const std::string& body);
  Reply PostRun(const std::string& body);
  Reply GetRun(const std::string& id) const;
  Reply GetRunLmp(const std::string& id, const std::string& hour) const;
  Reply DeleteRun(const std::string& id);

  // Blocks until the queue is empty and the worker is idle.
  void WaitIdle();

 private:
  enum class State { kQueued, kRunning, kDone, kFailed, kCancelled };
  struct Job {
    State state = State::kQueued;
    bool cancel = false;
    ScenarioConfig config;
    NetworkCase snapshot;
  };

  void Work();
  std::string RecordPath(const std::string& id) const;
  static const char* StateName(State s);

  mutable std::shared_mutex case_mutex_;
  NetworkCase case_;
  std::string case_path_;
  std::string data_dir_;

  mutable std::mutex jobs_mutex_;
  std::condition_variable jobs_cv_;
  std::map<std::string, Job> jobs_;
  std::deque<std::string> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

void RegisterRoutes(httplib::Server& server, MarketService& service);

// Serves until the process is interrupted. Throws Error(kIo, "port-bind").
void Serve(MarketService& service, const std::string& host, int port);

}  // namespace gridclear::service

#endif  // GRIDCLEAR_TOOLS_SERVICE_SERVER_H_
