#include "tunescape/measure.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "tunescape/errors.hpp"

namespace tunescape {

Observation simulated_lookup(const TuningCache& cache, const std::string& key) {
  const Observation* obs = cache.find(key);
  if (!obs) throw MissingEntry(key);
  return *obs;
}

SimulatedBackend::SimulatedBackend(TuningCache cache, const SearchSpaceSpec& space)
    : cache_(std::move(cache)), space_(space) {
  cache_.check_space(space_);
}

Observation SimulatedBackend::measure(const Configuration& config, const MeasurementProtocol&) {
  return simulated_lookup(cache_, space_.key(config));
}

// ---------------------------------------------------------------------------------------------

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  bool in_word = false;
  bool quoted = false;
  for (const char c : text) {
    if (c == '"') {
      quoted = !quoted;
      in_word = true;
    } else if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
      if (in_word) words.push_back(std::move(current));
      current.clear();
      in_word = false;
    } else {
      current += c;
      in_word = true;
    }
  }
  if (quoted) throw std::invalid_argument(fmt::format("unbalanced quote in command '{}'", text));
  if (in_word) words.push_back(std::move(current));
  return words;
}

// Calls `on_placeholder(name)` for every {name}; returns the text with replacements applied.
template <typename F>
std::string substitute(const std::string& word, F&& on_placeholder) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = word.find('{', pos);
    if (open == std::string::npos) break;
    const std::size_t close = word.find('}', open + 1);
    if (close == std::string::npos) break;
    out.append(word, pos, open - pos);
    out += on_placeholder(word.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  out.append(word, pos, std::string::npos);
  return out;
}

std::size_t parameter_index(const SearchSpaceSpec& space, const std::string& name) {
  const auto& params = space.parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == name) return i;
  throw std::invalid_argument(fmt::format("placeholder '{{{}}}' names no parameter of '{}'", name,
                                          space.kernel_name()));
}

std::size_t count_placeholders(const std::string& text, const SearchSpaceSpec& space) {
  std::size_t n = 0;
  (void)substitute(text, [&](const std::string& name) {
    (void)parameter_index(space, name);
    ++n;
    return std::string();
  });
  return n;
}

std::string tail(const std::string& text, std::size_t max = 400) {
  return text.size() <= max ? text : "..." + text.substr(text.size() - max);
}

std::string describe_exit(const ProcessResult& r) {
  if (r.launch_failed) return fmt::format("could not launch command: {}", tail(r.standard_error));
  return fmt::format("exit code {}: {}", r.exit_code, tail(r.standard_error));
}

}  // namespace

std::vector<std::string> expand_command(const std::string& command_template,
                                        const SearchSpaceSpec& space, const Configuration& config) {
  std::vector<std::string> argv;
  for (const auto& word : split_words(command_template)) {
    argv.push_back(substitute(word, [&](const std::string& name) {
      return format_param_value(space.value(config, parameter_index(space, name)));
    }));
  }
  return argv;
}

std::vector<double> parse_tune_times(const std::string& output) {
  static constexpr std::string_view kTag = "TUNE_TIME_MS";
  std::vector<double> times;
  std::size_t pos = 0;
  while (pos < output.size()) {
    std::size_t nl = output.find('\n', pos);
    if (nl == std::string::npos) nl = output.size();
    std::string_view line(output.data() + pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.substr(0, kTag.size()) != kTag) continue;
    std::string_view rest = line.substr(kTag.size());
    if (rest.empty() || !std::isspace(static_cast<unsigned char>(rest.front())))
      throw std::invalid_argument(fmt::format("malformed timing line '{}'", line));
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
    double value = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
    if (ec != std::errc{} || ptr != rest.data() + rest.size())
      throw std::invalid_argument(fmt::format("malformed timing line '{}'", line));
    times.push_back(value);
  }
  return times;
}

Observation command_execute(const BackendDescriptor& descriptor, const SearchSpaceSpec& space,
                            const Configuration& config, const MeasurementProtocol& protocol) {
  protocol.validate();
  const std::string key = space.key(config);
  auto run = [&](const std::string& tmpl) {
    return run_process(expand_command(tmpl, space, config), descriptor.working_directory,
                       descriptor.environment, protocol.timeout);
  };

  if (!descriptor.compile_template.empty()) {
    const ProcessResult compiled = run(descriptor.compile_template);
    if (compiled.timed_out) return Observation::failure(key, Status::timeout, "compile step timed out");
    if (compiled.exit_code != 0 || compiled.launch_failed)
      return Observation::failure(key, Status::compile_failed, describe_exit(compiled));
  }

  const auto warmups = static_cast<std::size_t>(protocol.warmup_runs);
  const auto runs = static_cast<std::size_t>(protocol.benchmark_runs);
  std::vector<double> times;

  auto collect = [&](const ProcessResult& r, std::vector<double>& into) -> std::optional<Observation> {
    if (r.timed_out) return Observation::failure(key, Status::timeout, "benchmark run timed out");
    if (r.exit_code != 0 || r.launch_failed)
      return Observation::failure(key, Status::runtime_failed, describe_exit(r));
    try {
      into = parse_tune_times(r.standard_output);
    } catch (const std::invalid_argument& e) {
      return Observation::failure(key, Status::runtime_failed, e.what());
    }
    if (into.empty())
      return Observation::failure(key, Status::runtime_failed, "no TUNE_TIME_MS line in output");
    return std::nullopt;
  };

  if (descriptor.self_repeating) {
    std::vector<double> reported;
    if (auto failed = collect(run(descriptor.command_template), reported)) return *failed;
    if (reported.size() == warmups + runs) {
      times.assign(reported.begin() + static_cast<std::ptrdiff_t>(warmups), reported.end());
    } else if (reported.size() == runs) {
      times = std::move(reported);
    } else {
      return Observation::failure(
          key, Status::runtime_failed,
          fmt::format("expected {} or {} TUNE_TIME_MS lines, got {}", runs, warmups + runs,
                      reported.size()));
    }
  } else {
    for (std::size_t i = 0; i < warmups + runs; ++i) {
      std::vector<double> reported;
      if (auto failed = collect(run(descriptor.command_template), reported)) return *failed;
      if (i >= warmups) times.push_back(reported.back());
    }
  }

  for (const double t : times)
    if (!std::isfinite(t) || t <= 0)
      return Observation::failure(key, Status::runtime_failed,
                                  fmt::format("reported non-positive or non-finite time {}", t));

  const double time = aggregate(times, protocol.aggregate);
  std::optional<double> metric;
  if (space.metric()) metric = space.compute_metric(time, config);
  return Observation::success(key, std::move(times), time, metric);
}

CommandBackend::CommandBackend(BackendDescriptor descriptor, const SearchSpaceSpec& space)
    : descriptor_(std::move(descriptor)), space_(space) {
  if (descriptor_.command_template.empty())
    throw std::invalid_argument("command backend needs a command template");
  const std::size_t placeholders = count_placeholders(descriptor_.command_template, space_) +
                                   count_placeholders(descriptor_.compile_template, space_);
  if (placeholders == 0 && !descriptor_.parameterless)
    throw std::invalid_argument(
        "command template has no {parameter} placeholder; mark it parameterless to allow this");
}

std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      const SearchSpaceSpec& space) {
  if (descriptor.kind == BackendKind::simulated)
    return std::make_unique<SimulatedBackend>(read_cache(descriptor.source_cache), space);
  return std::make_unique<CommandBackend>(descriptor, space);
}

}  // namespace tunescape
