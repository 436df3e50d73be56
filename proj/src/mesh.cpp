#include "qw/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qw {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_mesh(const WaveguideMesh& mesh) {
  if (mesh.n_modes < 1) throw std::invalid_argument("mesh: n_modes must be positive");
  for (const auto& layer : mesh.layers) {
    std::vector<char> used(mesh.n_modes + 1, 0);
    for (const auto& [a, t] : layer.couplers) {
      if (a < 1 || a + 1 > mesh.n_modes)
        throw std::invalid_argument("mesh: coupler outside the guide range");
      if (t < 0.0 || t > 1.0)
        throw std::invalid_argument("mesh: transmittance outside [0, 1]");
      if (used[a] || used[a + 1]) throw std::invalid_argument("mesh: overlapping couplers");
      used[a] = 1;
      used[a + 1] = 1;
    }
    for (const auto& [w, s] : layer.mirrors) {
      if (w < 1 || w > mesh.n_modes)
        throw std::invalid_argument("mesh: mirror outside the guide range");
      if (s != 1 && s != -1) throw std::invalid_argument("mesh: mirror sign must be +1 or -1");
      if (used[w]) throw std::invalid_argument("mesh: mirror on a coupled guide");
      used[w] = 1;
    }
  }
  const auto n = static_cast<size_t>(mesh.n_modes);
  if (!mesh.input_channel.empty() && mesh.input_channel.size() != n)
    throw std::invalid_argument("mesh: input embedding size mismatch");
  if (!mesh.output_channel.empty() && mesh.output_channel.size() != n)
    throw std::invalid_argument("mesh: output embedding size mismatch");
}

std::string channel_token(const ModeChannel& ch) {
  return std::to_string(ch.site) + (ch.coin == kRight ? "R" : "L");
}

ModeChannel parse_channel(const std::string& token) {
  if (token.size() < 2 || (token.back() != 'L' && token.back() != 'R'))
    throw std::invalid_argument("mesh_from_text: malformed channel '" + token + "'");
  ModeChannel ch;
  ch.site = std::stoi(token.substr(0, token.size() - 1));
  ch.coin = token.back() == 'R' ? kRight : kLeft;
  return ch;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::vector<std::string> split_items(const std::string& value) {
  std::vector<std::string> items;
  std::istringstream vs(value);
  std::string item;
  while (std::getline(vs, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

WaveguideMesh layout_dtqw(const CouplingProfile& profile) {
  const int n = profile.n_sites;
  const int m = profile.n_steps;
  if (n < 3 || m < 1 || profile.transmittances.size() != n - 1)
    throw std::invalid_argument("layout_dtqw: malformed profile");
  constexpr double kHalfPi = std::numbers::pi / 2;
  for (int x = 0; x < n - 1; ++x)
    if (profile.angles(x) < 0.0 || profile.angles(x) > kHalfPi + 1e-12)
      throw std::domain_error(
          "layout_dtqw: angle beyond pi/2, no transmittance-only coupler realizes it");

  WaveguideMesh mesh;
  mesh.n_modes = n;
  mesh.layers.reserve(m);
  for (int k = 1; k <= m; ++k) {
    CouplerLayer layer;
    for (int x = (k % 2 == 1) ? 1 : 2; x <= n - 1; x += 2)
      layer.couplers.emplace_back(x, profile.transmittances(x - 1));
    if (k % 2 == 0) layer.mirrors.emplace_back(1, -1);
    if (n % 2 == k % 2) layer.mirrors.emplace_back(n, 1);
    mesh.layers.push_back(std::move(layer));
  }

  // Guide w carries (w, right) when w matches the boundary parity, else
  // (w-1, left); the input boundary is odd, each layer flips it.
  mesh.input_channel.resize(n);
  mesh.output_channel.resize(n);
  const int out_parity = (1 + m) % 2;
  for (int w = 1; w <= n; ++w) {
    mesh.input_channel[w - 1] =
        (w % 2 == 1) ? ModeChannel{w, kRight} : ModeChannel{w - 1, kLeft};
    mesh.output_channel[w - 1] =
        (w % 2 == out_parity) ? ModeChannel{w, kRight} : ModeChannel{w - 1, kLeft};
  }
  return mesh;
}

Mat compile_unitary(const WaveguideMesh& mesh) {
  check_mesh(mesh);
  const int n = mesh.n_modes;
  Mat u = Mat::Identity(n, n);
  for (const auto& layer : mesh.layers) {
    Mat l = Mat::Identity(n, n);
    for (const auto& [a, t] : layer.couplers) {
      const double s = std::sqrt(t);
      const double c = std::sqrt(1.0 - t);
      l(a - 1, a - 1) = c;
      l(a - 1, a) = s;
      l(a, a - 1) = s;
      l(a, a) = -c;
    }
    for (const auto& [w, s] : layer.mirrors) l(w - 1, w - 1) = s;
    u = l * u;
  }
  return u;
}

Mat ctqw_target(const CouplingProfile& profile, double time) {
  return herm_exp(effective_hamiltonian(profile), time);
}

std::string mesh_to_text(const WaveguideMesh& mesh) {
  check_mesh(mesh);
  std::ostringstream os;
  os << "n_modes = " << mesh.n_modes << "\n";
  for (const auto& layer : mesh.layers) {
    os << "layer =";
    bool first = true;
    for (const auto& [a, t] : layer.couplers) {
      os << (first ? " " : ", ") << a << ":" << format_double(t);
      first = false;
    }
    for (const auto& [w, s] : layer.mirrors) {
      os << (first ? " " : ", ") << "m" << w << ":" << (s > 0 ? "+1" : "-1");
      first = false;
    }
    os << "\n";
  }
  const auto emit_channels = [&os](const char* key, const std::vector<ModeChannel>& chs) {
    if (chs.empty()) return;
    os << key << " =";
    for (size_t i = 0; i < chs.size(); ++i)
      os << (i ? ", " : " ") << channel_token(chs[i]);
    os << "\n";
  };
  emit_channels("input", mesh.input_channel);
  emit_channels("output", mesh.output_channel);
  return os.str();
}

WaveguideMesh mesh_from_text(const std::string& text) {
  WaveguideMesh mesh;
  bool have_modes = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("mesh_from_text: expected key = value lines");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "n_modes") {
      mesh.n_modes = std::stoi(val);
      have_modes = true;
    } else if (key == "layer") {
      CouplerLayer layer;
      for (const auto& item : split_items(val)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw std::invalid_argument("mesh_from_text: malformed layer item '" + item + "'");
        const std::string left = trim(item.substr(0, colon));
        const std::string right = trim(item.substr(colon + 1));
        if (!left.empty() && left[0] == 'm')
          layer.mirrors.emplace_back(std::stoi(left.substr(1)), std::stoi(right));
        else
          layer.couplers.emplace_back(std::stoi(left), std::stod(right));
      }
      mesh.layers.push_back(std::move(layer));
    } else if (key == "input" || key == "output") {
      auto& chs = key == "input" ? mesh.input_channel : mesh.output_channel;
      for (const auto& item : split_items(val)) chs.push_back(parse_channel(item));
    } else {
      throw std::invalid_argument("mesh_from_text: unknown key '" + key + "'");
    }
  }
  if (!have_modes) throw std::invalid_argument("mesh_from_text: missing n_modes");
  check_mesh(mesh);
  return mesh;
}

}  // namespace qw
