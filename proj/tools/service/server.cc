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

#include "server.h"

#include <filesystem>
#include <numbers>

#include "gridclear/error.h"
#include "httplib.h"
#include "json.hpp"

namespace gridclear::service {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

Reply JsonReply(int status, const json& body) {
  return {status, body.dump(2) + "\n"};
}

Reply ErrorReply(int status, const std::string& rule,
                 const std::string& message) {
  return JsonReply(status, {{"error", rule}, {"message", message}});
}

json ParseBody(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorKind::kParse, "bad-json",
                "request body must be a JSON object");
  }
  return doc;
}

int RequireInt(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorKind::kParse, "missing-field",
                std::string("missing field '") + key + "'");
  }
  if (!it->is_number_integer()) {
    throw Error(ErrorKind::kParse, "bad-value",
                std::string("field '") + key + "' must be an integer");
  }
  return it->get<int>();
}

double PositiveOr(const json& doc, const char* key, double fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number() || !(it->get<double>() > 0.0)) {
    throw Error(ErrorKind::kParse, "tolerance",
                std::string("field '") + key + "' must be a positive number");
  }
  return it->get<double>();
}

json ReserveJson(const ReserveSet& r) {
  return {{"r", r.r}, {"sp", r.sp}, {"n1", r.n1}, {"n3", r.n3}};
}

json BlocksJson(const std::vector<BidBlock>& blocks) {
  json out = json::array();
  for (const BidBlock& b : blocks) out.push_back({b.price, b.quantity});
  return out;
}

}  // namespace

MarketService::MarketService(NetworkCase c, std::string case_path,
                             std::string data_dir)
    : case_(std::move(c)),
      case_path_(std::move(case_path)),
      data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(fs::path(data_dir_) / "runs", ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "output-dir",
                "cannot create " + data_dir_ + ": " + ec.message());
  }
  for (const auto& entry : fs::directory_iterator(fs::path(data_dir_) / "runs")) {
    if (entry.path().extension() != ".json") continue;
    Job job;
    job.state = State::kDone;
    jobs_.emplace(entry.path().stem().string(), std::move(job));
  }
  worker_ = std::thread([this] { Work(); });
}

MarketService::~MarketService() {
  {
    std::lock_guard lock(jobs_mutex_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  worker_.join();
}

const char* MarketService::StateName(State s) {
  switch (s) {
    case State::kQueued: return "queued";
    case State::kRunning: return "running";
    case State::kDone: return "done";
    case State::kFailed: return "failed";
    case State::kCancelled: return "cancelled";
  }
  return "unknown";
}

std::string MarketService::RecordPath(const std::string& id) const {
  return (fs::path(data_dir_) / "runs" / (id + ".json")).string();
}

Reply MarketService::Network() const {
  std::shared_lock lock(case_mutex_);
  const NetworkCase& c = case_;
  const double mva = c.base_mva;
  json buses = json::array();
  for (const Bus& b : c.buses) {
    const char* kind = b.kind == BusKind::kSlack ? "slack"
                       : b.kind == BusKind::kPv  ? "pv"
                                                 : "pq";
    buses.push_back({{"id", b.id},
                     {"type", kind},
                     {"vm", b.voltage_magnitude},
                     {"va", b.voltage_angle * 180.0 / std::numbers::pi},
                     {"pd", b.load_p * mva},
                     {"qd", b.load_q * mva}});
  }
  json branches = json::array();
  for (const Branch& br : c.branches) {
    branches.push_back({{"from", c.buses[br.from_bus].id},
                        {"to", c.buses[br.to_bus].id},
                        {"r", br.r},
                        {"x", br.x},
                        {"b", br.b_charging},
                        {"rating", br.rating * mva},
                        {"in_service", br.in_service}});
  }
  json gens = json::array();
  for (const Generator& g : c.generators) {
    gens.push_back({{"id", g.id},
                    {"bus", c.buses[g.bus].id},
                    {"p_min", g.p_min * mva},
                    {"p_max", g.p_max * mva}});
  }
  return JsonReply(200, {{"name", c.name},
                         {"base_mva", mva},
                         {"case_hash", CaseHash(c)},
                         {"hours", c.horizon()},
                         {"buses", buses},
                         {"branches", branches},
                         {"generators", gens}});
}

Reply MarketService::Hour(int hour) const {
  std::shared_lock lock(case_mutex_);
  const NetworkCase& c = case_;
  if (hour < 1 || hour > c.horizon()) {
    return ErrorReply(400, "hour-range",
                      "hour must be in 1.." + std::to_string(c.horizon()));
  }
  const HourNode& node = c.time_tree.hours[hour - 1];
  json bids = json::object();
  for (int g = 0; g < c.generator_count(); ++g) {
    bids[std::to_string(c.generators[g].id)] = BlocksJson(node.bids[g]);
  }
  json out = {{"hour", hour},
              {"demand", node.demand * c.base_mva},
              {"reserve_req", ReserveJson(node.reserve_requirement)},
              {"bids", bids}};
  if (node.outcome) {
    json dispatch = json::array();
    for (double p : node.outcome->dispatch) dispatch.push_back(p * c.base_mva);
    out["outcome"] = {{"committed", node.outcome->committed},
                      {"dispatch_mw", dispatch},
                      {"lmp", node.outcome->lmp},
                      {"lmp_average", node.outcome->lmp_average}};
  }
  return JsonReply(200, out);
}

Reply MarketService::PostBids(const std::string& body) {
  try {
    const json doc = ParseBody(body);
    const int hour = RequireInt(doc, "hour");
    const int gen = RequireInt(doc, "gen");
    auto it = doc.find("blocks");
    if (it == doc.end() || !it->is_array()) {
      throw Error(ErrorKind::kParse, "missing-field",
                  "field 'blocks' must be an array of [price, mw]");
    }
    std::vector<BidBlock> blocks;
    for (const json& pair : *it) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
          !pair[1].is_number()) {
        throw Error(ErrorKind::kParse, "bad-value",
                    "each block must be [price, mw]");
      }
      blocks.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    std::unique_lock lock(case_mutex_);
    case_ = UpdateBids(case_, hour - 1, gen, blocks);
    return JsonReply(200, {{"hour", hour},
                           {"gen", gen},
                           {"blocks", BlocksJson(blocks)}});
  } catch (const Error& e) {
    return ErrorReply(400, e.rule(), e.what());
  }
}

Reply MarketService::PostRun(const std::string& body) {
  Job job;
  try {
    const json doc = body.empty() ? json::object() : ParseBody(body);
    ScenarioConfig& cfg = job.config;
    auto mode = doc.find("mode");
    if (mode == doc.end() || !mode->is_string()) {
      throw Error(ErrorKind::kParse, "missing-field",
                  "field 'mode' must be a string");
    }
    cfg.mode = ParseRunMode(mode->get<std::string>());
    cfg.case_path = case_path_;
    if (doc.contains("slack")) cfg.slack_bus = RequireInt(doc, "slack");
    cfg.eps_pf = PositiveOr(doc, "eps_pf", cfg.eps_pf);
    cfg.eps_flow = PositiveOr(doc, "eps_flow", cfg.eps_flow);
    cfg.milp_gap = PositiveOr(doc, "gap", cfg.milp_gap);
  } catch (const Error& e) {
    return ErrorReply(400, e.rule(), e.what());
  }
  {
    std::shared_lock lock(case_mutex_);
    job.snapshot = case_;
  }
  const std::string id = NewRunId();
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_.emplace(id, std::move(job));
    queue_.push_back(id);
  }
  jobs_cv_.notify_all();
  return JsonReply(202, {{"run_id", id}, {"status", "queued"}});
}

Reply MarketService::GetRun(const std::string& id) const {
  State state;
  {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) {
      return ErrorReply(404, "unknown-run", "no run with id " + id);
    }
    state = it->second.state;
  }
  if (state == State::kDone || state == State::kFailed) {
    try {
      return {200, ReadFile(RecordPath(id))};
    } catch (const Error& e) {
      return ErrorReply(500, e.rule(), e.what());
    }
  }
  return JsonReply(200, {{"run_id", id}, {"status", StateName(state)}});
}

Reply MarketService::GetRunLmp(const std::string& id,
                               const std::string& hour_text) const {
  Reply full = GetRun(id);
  if (full.status != 200) return full;
  const json doc = json::parse(full.body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("result")) {
    return ErrorReply(409, "run-not-finished", "run " + id + " has no result");
  }
  const json& result = doc["result"];
  if (!result.contains("hours")) {
    return ErrorReply(409, "no-prices", "run " + id + " did not compute prices");
  }
  int hour = 0;
  try {
    size_t used = 0;
    hour = std::stoi(hour_text, &used);
    if (used != hour_text.size()) throw std::invalid_argument(hour_text);
  } catch (const std::exception&) {
    return ErrorReply(400, "bad-value", "query parameter 'hour' must be an integer");
  }
  const json& hours = result["hours"];
  if (hour < 1 || hour > static_cast<int>(hours.size())) {
    return ErrorReply(400, "hour-range",
                      "hour must be in 1.." + std::to_string(hours.size()));
  }
  const json& h = hours[hour - 1];
  return JsonReply(200, {{"run_id", id},
                         {"hour", hour},
                         {"lmp", h["lmp"]},
                         {"lmp_average", h["lmp_average"]},
                         {"energy_price", h["energy_price"]}});
}

Reply MarketService::DeleteRun(const std::string& id) {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) {
    return ErrorReply(404, "unknown-run", "no run with id " + id);
  }
  Job& job = it->second;
  switch (job.state) {
    case State::kQueued:
      std::erase(queue_, id);
      job.state = State::kCancelled;
      return JsonReply(200, {{"run_id", id}, {"status", "cancelled"}});
    case State::kRunning:
      job.cancel = true;
      return JsonReply(200, {{"run_id", id}, {"status", "cancelling"}});
    case State::kCancelled:
      jobs_.erase(it);
      return JsonReply(200, {{"run_id", id}, {"status", "deleted"}});
    case State::kDone:
    case State::kFailed: {
      std::error_code ec;
      fs::remove(RecordPath(id), ec);
      jobs_.erase(it);
      return JsonReply(200, {{"run_id", id}, {"status", "deleted"}});
    }
  }
  return JsonReply(200, {{"run_id", id}});
}

void MarketService::WaitIdle() {
  std::unique_lock lock(jobs_mutex_);
  jobs_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void MarketService::Work() {
  for (;;) {
    std::string id;
    ScenarioConfig config;
    NetworkCase snapshot;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      Job& job = jobs_.at(id);
      job.state = State::kRunning;
      config = job.config;
      snapshot = std::move(job.snapshot);
      busy_ = true;
    }
    std::string text;
    bool ok = true;
    try {
      RunRecord record = RunScenario(snapshot, config);
      record.run_id = id;
      text = SerializeRecord(record);
    } catch (const Error& e) {
      ok = false;
      text = json({{"run_id", id},
                   {"status", "failed"},
                   {"error", {{"kind", ErrorKindName(e.kind())},
                              {"rule", e.rule()},
                              {"message", e.what()}}},
                   {"created_at", UtcTimestamp()}})
                 .dump(2) +
             "\n";
    } catch (const std::exception& e) {
      ok = false;
      text = json({{"run_id", id},
                   {"status", "failed"},
                   {"error", {{"kind", "internal"}, {"message", e.what()}}},
                   {"created_at", UtcTimestamp()}})
                 .dump(2) +
             "\n";
    }
    {
      std::lock_guard lock(jobs_mutex_);
      Job& job = jobs_.at(id);
      if (job.cancel) {
        job.state = State::kCancelled;
      } else {
        try {
          WriteFile(RecordPath(id), text);
          job.state = ok ? State::kDone : State::kFailed;
        } catch (const Error&) {
          job.state = State::kFailed;
        }
      }
      busy_ = false;
    }
    jobs_cv_.notify_all();
  }
}

void RegisterRoutes(httplib::Server& server, MarketService& service) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/network", [&service, send](const httplib::Request&,
                                          httplib::Response& res) {
    send(res, service.Network());
  });
  server.Get(R"(/hours/(\d+))", [&service, send](const httplib::Request& req,
                                                 httplib::Response& res) {
    int hour = 0;
    try {
      hour = std::stoi(req.matches[1]);
    } catch (const std::exception&) {
      hour = -1;
    }
    send(res, service.Hour(hour));
  });
  server.Post("/bids", [&service, send](const httplib::Request& req,
                                        httplib::Response& res) {
    send(res, service.PostBids(req.body));
  });
  server.Post("/runs", [&service, send](const httplib::Request& req,
                                        httplib::Response& res) {
    send(res, service.PostRun(req.body));
  });
  server.Get(R"(/runs/([0-9a-f]+))", [&service, send](
                                         const httplib::Request& req,
                                         httplib::Response& res) {
    send(res, service.GetRun(req.matches[1]));
  });
  server.Get(R"(/runs/([0-9a-f]+)/lmp)", [&service, send](
                                             const httplib::Request& req,
                                             httplib::Response& res) {
    if (!req.has_param("hour")) {
      send(res, {400, json({{"error", "missing-field"},
                            {"message", "query parameter 'hour' is required"}})
                          .dump(2) + "\n"});
      return;
    }
    send(res, service.GetRunLmp(req.matches[1], req.get_param_value("hour")));
  });
  server.Delete(R"(/runs/([0-9a-f]+))", [&service, send](
                                            const httplib::Request& req,
                                            httplib::Response& res) {
    send(res, service.DeleteRun(req.matches[1]));
  });
}

void Serve(MarketService& service, const std::string& host, int port) {
  httplib::Server server;
  RegisterRoutes(server, service);
  if (!server.bind_to_port(host, port)) {
    throw Error(ErrorKind::kIo, "port-bind",
                "cannot bind " + host + ":" + std::to_string(port));
  }
  server.listen_after_bind();
}

}  // namespace gridclear::service
