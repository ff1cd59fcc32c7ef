#include "sic/checkpoint.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sic/config.hpp"
#include "sic/errors.hpp"

namespace sic {

namespace {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  throw CheckpointError("unknown activation");
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw CheckpointError("unknown activation \"" + s + "\"");
}

std::string output_name(OutputActivation a) {
  return a == OutputActivation::Softmax ? "softmax" : "identity";
}

OutputActivation output_from(const std::string& s) {
  if (s == "softmax") return OutputActivation::Softmax;
  if (s == "identity") return OutputActivation::Identity;
  throw CheckpointError("unknown output activation \"" + s + "\"");
}

void append_doubles(std::string& out, std::span<const double> xs) {
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += fmt_double(xs[i]);
  }
}

void append_ints(std::string& out, std::span<const int> xs, char sep) {
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(xs[i]);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  const char* p = s.c_str();
  while (*p) {
    while (*p == ' ' || *p == '\t') ++p;
    if (!*p) break;
    char* end = nullptr;
    double d = std::strtod(p, &end);
    if (end == p) throw CheckpointError("malformed number list: " + s);
    out.push_back(d);
    p = end;
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s, char sep) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (const std::string& part : split(s, sep)) {
    char* end = nullptr;
    long v = std::strtol(part.c_str(), &end, 10);
    if (end == part.c_str() || *end != '\0')
      throw CheckpointError("malformed integer list: " + s);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

long long parse_ll(const std::string& s) {
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw CheckpointError("malformed integer: " + s);
  return v;
}

uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw CheckpointError("malformed integer: " + s);
  return v;
}

double parse_one_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw CheckpointError("malformed number: " + s);
  return v;
}

// Sequential reader; every helper throws CheckpointError on deviation so a
// truncated or edited file can never half-apply.
struct LineReader {
  std::stringstream ss;
  std::string line;

  explicit LineReader(const std::string& text) : ss(text) {}

  std::string next() {
    if (!std::getline(ss, line)) throw CheckpointError("unexpected end of checkpoint");
    return line;
  }
  bool peek_is(const std::string& expected) {
    std::streampos pos = ss.tellg();
    std::string l;
    if (!std::getline(ss, l)) return false;
    ss.seekg(pos);
    return l == expected;
  }
  bool peek_prefix(const std::string& prefix) {
    std::streampos pos = ss.tellg();
    std::string l;
    if (!std::getline(ss, l)) return false;
    ss.seekg(pos);
    return l.rfind(prefix, 0) == 0;
  }
  void expect(const std::string& exact) {
    if (next() != exact) throw CheckpointError("expected \"" + exact + "\", got \"" + line + "\"");
  }
  std::string value_of(const std::string& key) {
    std::string l = next();
    std::string prefix = key + " = ";
    if (l.rfind(prefix, 0) != 0)
      throw CheckpointError("expected \"" + key + " = ...\", got \"" + l + "\"");
    return l.substr(prefix.size());
  }
  bool at_end() {
    std::streampos pos = ss.tellg();
    std::string l;
    if (!std::getline(ss, l)) return true;
    ss.seekg(pos);
    return false;
  }
};

void append_trajectory(std::string& out, const Trajectory& e) {
  out += "signals = ";
  for (size_t t = 0; t < e.team_signals.size(); ++t) {
    if (t) out += '|';
    append_doubles(out, e.team_signals[t].values);
  }
  out += '\n';
  out += "steps = " + std::to_string(e.length()) + "\n";
  for (const TrajStep& s : e.steps) {
    out += "step = ";
    for (size_t a = 0; a < s.obs.size(); ++a) {
      if (a) out += ';';
      append_doubles(out, s.obs[a]);
    }
    out += " | ";
    append_ints(out, s.actions, ',');
    out += " | ";
    append_doubles(out, s.rewards);
    out += " | ";
    out += s.done ? '1' : '0';
    out += '\n';
  }
}

Trajectory read_trajectory(LineReader& r, int teams, int agents) {
  Trajectory e;
  std::string sig = r.value_of("signals");
  std::vector<std::string> parts = split(sig, '|');
  if (static_cast<int>(parts.size()) != teams)
    throw CheckpointError("pending episode: wrong team count");
  for (const std::string& p : parts) e.team_signals.push_back({parse_doubles(p)});
  long long steps = parse_ll(r.value_of("steps"));
  for (long long t = 0; t < steps; ++t) {
    std::string l = r.value_of("step");
    std::vector<std::string> fields = split(l, '|');
    if (fields.size() != 4) throw CheckpointError("pending step: expected 4 fields");
    TrajStep s;
    std::vector<std::string> obs_parts = split(fields[0], ';');
    if (static_cast<int>(obs_parts.size()) != agents)
      throw CheckpointError("pending step: wrong agent count");
    for (const std::string& p : obs_parts) s.obs.push_back(parse_doubles(p));
    // strip the single spaces around the " | " separators
    auto strip = [](std::string x) {
      if (!x.empty() && x.front() == ' ') x.erase(x.begin());
      if (!x.empty() && x.back() == ' ') x.pop_back();
      return x;
    };
    for (int v : parse_ints(strip(fields[1]), ',')) s.actions.push_back(v);
    s.rewards = parse_doubles(fields[2]);
    std::string d = strip(fields[3]);
    if (d != "0" && d != "1") throw CheckpointError("pending step: bad done flag");
    s.done = d == "1";
    if (static_cast<int>(s.actions.size()) != agents ||
        static_cast<int>(s.rewards.size()) != agents)
      throw CheckpointError("pending step: wrong agent count");
    e.steps.push_back(std::move(s));
  }
  return e;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::string s;
  s += "checkpoint-version = " + std::to_string(ck.version) + "\n";
  s += "episode = " + std::to_string(ck.episode) + "\n";

  s += "[config]\n";
  s += ck.config_text;
  if (!ck.config_text.empty() && ck.config_text.back() != '\n') s += '\n';
  s += "[/config]\n";

  s += "[rng]\n";
  for (const auto& kv : ck.rng_states)
    s += kv.first + " = " + std::to_string(kv.second) + "\n";
  s += "[/rng]\n";

  for (const auto& net : ck.nets) {
    s += "[net " + net.name + "]\n";
    s += "sizes = ";
    append_ints(s, net.spec.layer_sizes, ',');
    s += "\nhidden_activations = ";
    for (size_t i = 0; i < net.spec.hidden_activations.size(); ++i) {
      if (i) s += ',';
      s += activation_name(net.spec.hidden_activations[i]);
    }
    s += "\noutput = " + output_name(net.spec.output_activation) + "\n";
    s += "tensors = " + std::to_string(net.tensors.size()) + "\n";
    for (const Tensor& t : net.tensors) {
      s += "shape = ";
      append_ints(s, t.shape, ' ');
      s += "\nvalues = ";
      append_doubles(s, t.values);
      s += '\n';
    }
    s += "[/net]\n";
  }

  for (const auto& a : ck.adams) {
    s += "[adam " + a.name + "]\n";
    s += "step_count = " + std::to_string(a.step_count) + "\n";
    s += "m = ";
    append_doubles(s, a.m);
    s += "\nv = ";
    append_doubles(s, a.v);
    s += "\n[/adam]\n";
  }

  s += "[counters]\n";
  for (const auto& kv : ck.counters) s += kv.first + " = " + std::to_string(kv.second) + "\n";
  s += "[/counters]\n";

  s += "[state]\n";
  for (const auto& kv : ck.state) s += kv.first + " = " + fmt_double(kv.second) + "\n";
  s += "[/state]\n";

  for (const auto& p : ck.pending) {
    s += "[pending team" + std::to_string(p.team) + "]\n";
    s += "episodes = " + std::to_string(p.episodes.size()) + "\n";
    for (const Trajectory& e : p.episodes) append_trajectory(s, e);
    s += "[/pending]\n";
  }

  if (ck.has_replay) {
    s += "[replay]\n";
    s += "count = " + std::to_string(ck.replay.size()) + "\n";
    s += "next = " + std::to_string(ck.replay_next) + "\n";
    s += "inserted = " + std::to_string(ck.replay_inserted) + "\n";
    for (const Transition& tr : ck.replay) {
      s += "tr = ";
      for (size_t a = 0; a < tr.obs.size(); ++a) {
        if (a) s += ';';
        append_doubles(s, tr.obs[a]);
      }
      s += " | ";
      for (size_t a = 0; a < tr.next_obs.size(); ++a) {
        if (a) s += ';';
        append_doubles(s, tr.next_obs[a]);
      }
      s += " | ";
      append_ints(s, tr.actions, ',');
      s += " | ";
      append_doubles(s, tr.rewards);
      s += " | ";
      for (size_t t = 0; t < tr.team_signals.size(); ++t) {
        if (t) s += ';';
        append_doubles(s, tr.team_signals[t]);
      }
      s += " | ";
      s += tr.done ? '1' : '0';
      s += '\n';
    }
    s += "[/replay]\n";
  }
  return s;
}

Checkpoint parse_checkpoint(const std::string& text) {
  LineReader r(text);
  Checkpoint ck;
  ck.version = static_cast<int>(parse_ll(r.value_of("checkpoint-version")));
  if (ck.version != 1) throw CheckpointError("unsupported checkpoint version");
  ck.episode = parse_ll(r.value_of("episode"));

  r.expect("[config]");
  while (true) {
    std::string l = r.next();
    if (l == "[/config]") break;
    ck.config_text += l;
    ck.config_text += '\n';
  }

  // the embedded config fixes the agent/team counts used by later blocks
  int agents = 0;
  int teams = 0;
  try {
    ExperimentConfig cfg = parse_config(ck.config_text);
    std::unique_ptr<env::Env> e = make_env(cfg);
    agents = e->agent_count();
    teams = e->team_count();
  } catch (const Error& err) {
    throw CheckpointError(std::string("embedded config invalid: ") + err.what());
  }

  r.expect("[rng]");
  while (true) {
    std::string l = r.next();
    if (l == "[/rng]") break;
    size_t eq = l.find(" = ");
    if (eq == std::string::npos) throw CheckpointError("malformed rng line: " + l);
    ck.rng_states.emplace_back(l.substr(0, eq), parse_u64(l.substr(eq + 3)));
  }

  while (r.peek_prefix("[net ")) {
    std::string head = r.next();
    Checkpoint::NetBlock net;
    net.name = head.substr(5, head.size() - 6);
    net.spec.layer_sizes = parse_ints(r.value_of("sizes"), ',');
    std::string acts = r.value_of("hidden_activations");
    if (!acts.empty())
      for (const std::string& a : split(acts, ',')) net.spec.hidden_activations.push_back(activation_from(a));
    net.spec.output_activation = output_from(r.value_of("output"));
    try {
      net.spec.validate();
    } catch (const Error& err) {
      throw CheckpointError("net \"" + net.name + "\": " + err.what());
    }
    long long count = parse_ll(r.value_of("tensors"));
    for (long long i = 0; i < count; ++i) {
      Tensor t;
      t.shape = parse_ints(r.value_of("shape"), ' ');
      t.values = parse_doubles(r.value_of("values"));
      int expect = 1;
      for (int d : t.shape) expect *= d;
      if (t.shape.empty() || static_cast<int>(t.values.size()) != expect)
        throw CheckpointError("tensor shape/value mismatch in net " + net.name);
      t.grad.assign(t.values.size(), 0.0);
      net.tensors.push_back(std::move(t));
    }
    r.expect("[/net]");
    ck.nets.push_back(std::move(net));
  }

  while (r.peek_prefix("[adam ")) {
    std::string head = r.next();
    Checkpoint::AdamBlock a;
    a.name = head.substr(6, head.size() - 7);
    a.step_count = parse_ll(r.value_of("step_count"));
    a.m = parse_doubles(r.value_of("m"));
    a.v = parse_doubles(r.value_of("v"));
    if (a.m.size() != a.v.size()) throw CheckpointError("adam m/v length mismatch: " + a.name);
    r.expect("[/adam]");
    ck.adams.push_back(std::move(a));
  }

  r.expect("[counters]");
  while (true) {
    std::string l = r.next();
    if (l == "[/counters]") break;
    size_t eq = l.find(" = ");
    if (eq == std::string::npos) throw CheckpointError("malformed counter line: " + l);
    ck.counters.emplace_back(l.substr(0, eq), parse_ll(l.substr(eq + 3)));
  }

  r.expect("[state]");
  while (true) {
    std::string l = r.next();
    if (l == "[/state]") break;
    size_t eq = l.find(" = ");
    if (eq == std::string::npos) throw CheckpointError("malformed state line: " + l);
    ck.state.emplace_back(l.substr(0, eq), parse_one_double(l.substr(eq + 3)));
  }

  while (r.peek_prefix("[pending team")) {
    std::string head = r.next();
    Checkpoint::PendingBlock p;
    p.team = static_cast<int>(parse_ll(head.substr(13, head.size() - 14)));
    long long count = parse_ll(r.value_of("episodes"));
    for (long long i = 0; i < count; ++i) p.episodes.push_back(read_trajectory(r, teams, agents));
    r.expect("[/pending]");
    ck.pending.push_back(std::move(p));
  }

  if (r.peek_is("[replay]")) {
    r.next();
    ck.has_replay = true;
    long long count = parse_ll(r.value_of("count"));
    ck.replay_next = static_cast<int>(parse_ll(r.value_of("next")));
    ck.replay_inserted = parse_ll(r.value_of("inserted"));
    auto strip = [](std::string x) {
      if (!x.empty() && x.front() == ' ') x.erase(x.begin());
      if (!x.empty() && x.back() == ' ') x.pop_back();
      return x;
    };
    for (long long i = 0; i < count; ++i) {
      std::string l = r.value_of("tr");
      std::vector<std::string> fields = split(l, '|');
      if (fields.size() != 6) throw CheckpointError("replay transition: expected 6 fields");
      Transition tr;
      for (const std::string& p : split(fields[0], ';')) tr.obs.push_back(parse_doubles(p));
      for (const std::string& p : split(fields[1], ';')) tr.next_obs.push_back(parse_doubles(p));
      tr.actions = parse_ints(strip(fields[2]), ',');
      tr.rewards = parse_doubles(fields[3]);
      for (const std::string& p : split(fields[4], ';')) tr.team_signals.push_back(parse_doubles(p));
      std::string d = strip(fields[5]);
      if (d != "0" && d != "1") throw CheckpointError("replay transition: bad done flag");
      tr.done = d == "1";
      if (static_cast<int>(tr.obs.size()) != agents ||
          static_cast<int>(tr.next_obs.size()) != agents ||
          static_cast<int>(tr.actions.size()) != agents ||
          static_cast<int>(tr.rewards.size()) != agents ||
          static_cast<int>(tr.team_signals.size()) != teams)
        throw CheckpointError("replay transition: wrong agent/team counts");
      ck.replay.push_back(std::move(tr));
    }
    r.expect("[/replay]");
  }

  if (!r.at_end()) throw CheckpointError("trailing content after checkpoint");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot write checkpoint: " + path);
  std::string s = serialize_checkpoint(ck);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw CheckpointError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot read checkpoint: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_checkpoint(ss.str());
}

Checkpoint::NetBlock snapshot_net(const std::string& name, const Mlp& net) {
  Checkpoint::NetBlock b;
  b.name = name;
  b.spec = net.spec();
  b.tensors = net.params();
  for (Tensor& t : b.tensors) t.zero_grad();
  return b;
}

void restore_net(const Checkpoint::NetBlock& block, Mlp& net) {
  const MlpSpec& live = net.spec();
  if (block.spec.layer_sizes != live.layer_sizes ||
      block.spec.hidden_activations != live.hidden_activations ||
      block.spec.output_activation != live.output_activation)
    throw CheckpointError("net \"" + block.name + "\": architecture mismatch");
  std::vector<Tensor>& params = net.params();
  if (params.size() != block.tensors.size())
    throw CheckpointError("net \"" + block.name + "\": tensor count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape != block.tensors[i].shape)
      throw CheckpointError("net \"" + block.name + "\": tensor shape mismatch");
    params[i].values = block.tensors[i].values;
  }
}

Mlp instantiate_net(const Checkpoint::NetBlock& block) {
  Rng dummy(0);
  Mlp net(block.spec, dummy);
  restore_net(block, net);
  return net;
}

}  // namespace sic
