#include "cspmv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace cspmv {

std::string_view to_string(Library lib) {
  switch (lib) {
    case Library::LibA: return "LibA";
    case Library::LibB: return "LibB";
    case Library::LibC: return "LibC";
  }
  return "?";
}

Library parse_library(std::string_view token) {
  for (Library lib : kAllLibraries) {
    if (to_string(lib) == token) return lib;
  }
  throw std::invalid_argument("unknown library '" + std::string(token) + "'");
}

bool supports(Library lib, Format format) {
  switch (lib) {
    case Library::LibA: return true;
    case Library::LibB: return format == Format::COO || format == Format::CSR;
    case Library::LibC: return format == Format::CSR || format == Format::ELL;
  }
  return false;
}

bool SpmvConfig::valid() const {
  if (!supports(library, format)) return false;
  const bool wants_lanes = format == Format::CSR && library == Library::LibA;
  if (wants_lanes != lane_width.has_value()) return false;
  if (lane_width) {
    return std::find(std::begin(kLaneWidths), std::end(kLaneWidths),
                     *lane_width) != std::end(kLaneWidths);
  }
  return true;
}

std::string SpmvConfig::token() const {
  std::string t(to_string(format));
  t += '-';
  t += to_string(library);
  if (lane_width) t += '-' + std::to_string(*lane_width);
  return t;
}

SpmvConfig SpmvConfig::parse(std::string_view token) {
  SpmvConfig cfg;
  const auto dash = token.find('-');
  if (dash == std::string_view::npos) {
    throw UnsupportedConfig("malformed config token '" + std::string(token) + "'");
  }
  try {
    cfg.format = parse_format(token.substr(0, dash));
    auto rest = token.substr(dash + 1);
    const auto dash2 = rest.find('-');
    cfg.library = parse_library(rest.substr(0, dash2));
    if (dash2 != std::string_view::npos) {
      const auto lanes = rest.substr(dash2 + 1);
      int w = 0;
      auto [ptr, ec] = std::from_chars(lanes.data(), lanes.data() + lanes.size(), w);
      if (ec != std::errc{} || ptr != lanes.data() + lanes.size()) {
        throw UnsupportedConfig("bad lane width in '" + std::string(token) + "'");
      }
      cfg.lane_width = w;
    }
  } catch (const UnsupportedConfig&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UnsupportedConfig(e.what());
  }
  if (!cfg.valid()) {
    throw UnsupportedConfig("unsupported config '" + std::string(token) + "'");
  }
  return cfg;
}

const std::vector<SpmvConfig>& enumerate_configs() {
  static const std::vector<SpmvConfig> configs = [] {
    std::vector<SpmvConfig> out;
    for (Format f : {Format::COO, Format::ELL, Format::DIA, Format::HYB}) {
      out.push_back({f, Library::LibA, {}});
    }
    for (int w : kLaneWidths) out.push_back({Format::CSR, Library::LibA, w});
    out.push_back({Format::COO, Library::LibB, {}});
    out.push_back({Format::CSR, Library::LibB, {}});
    out.push_back({Format::CSR, Library::LibC, {}});
    out.push_back({Format::ELL, Library::LibC, {}});
    return out;
  }();
  return configs;
}

std::size_t config_index(const SpmvConfig& cfg) {
  const auto& all = enumerate_configs();
  const auto it = std::find(all.begin(), all.end(), cfg);
  if (it == all.end()) {
    throw UnsupportedConfig("unsupported config '" + cfg.token() + "'");
  }
  return static_cast<std::size_t>(it - all.begin());
}

int heuristic_lane_width(double mean_row_nnz) {
  const double per_row = std::floor(std::max(mean_row_nnz, 0.0));
  for (int w : kLaneWidths) {
    if (per_row <= w) return w;
  }
  return 32;
}

}  // namespace cspmv
