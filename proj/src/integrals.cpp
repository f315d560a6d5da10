#include "hivqe/integrals.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

namespace hivqe {

IntegralSet::IntegralSet(std::size_t n_orb, int n_alpha, int n_beta)
    : n_orb_(n_orb), n_alpha_(n_alpha), n_beta_(n_beta) {
  if (n_orb > 64) throw std::invalid_argument("at most 64 spatial orbitals are supported");
  if (n_alpha < 0 || n_beta < 0 || static_cast<std::size_t>(n_alpha) > n_orb ||
      static_cast<std::size_t>(n_beta) > n_orb) {
    throw std::invalid_argument("electron counts must lie in [0, n_orb]");
  }
  const std::size_t n_pair = n_orb * (n_orb + 1) / 2;
  one_body_.assign(n_orb * n_orb, 0.0);
  two_body_.assign(n_pair * (n_pair + 1) / 2, 0.0);
  coulomb_.assign(n_orb * n_orb, 0.0);
  exchange_.assign(n_orb * n_orb, 0.0);
}

void IntegralSet::check_index(std::size_t p) const {
  if (p >= n_orb_) {
    throw std::out_of_range("orbital index " + std::to_string(p) + " out of range for n_orb=" +
                            std::to_string(n_orb_));
  }
}

void IntegralSet::set_h1(std::size_t p, std::size_t q, double value) {
  check_index(p);
  check_index(q);
  one_body_[p * n_orb_ + q] = value;
  one_body_[q * n_orb_ + p] = value;
}

double IntegralSet::get_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
  check_index(p);
  check_index(q);
  check_index(r);
  check_index(s);
  return eri(p, q, r, s);
}

void IntegralSet::set_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s,
                          double value) {
  check_index(p);
  check_index(q);
  check_index(r);
  check_index(s);
  const std::size_t pq = pair_index(p, q);
  const std::size_t rs = pair_index(r, s);
  two_body_[pair_index(pq, rs)] = value;
  if (p == q && r == s) {
    coulomb_[p * n_orb_ + r] = value;
    coulomb_[r * n_orb_ + p] = value;
  }
  if (pq == rs) {
    exchange_[p * n_orb_ + q] = value;
    exchange_[q * n_orb_ + p] = value;
  }
}

std::string IntegralSet::to_fcidump() const {
  std::ostringstream out;
  out << "&FCI NORB=" << n_orb_ << ",NELEC=" << n_electrons() << ",MS2=" << (n_alpha_ - n_beta_)
      << ",\n ORBSYM=";
  for (std::size_t i = 0; i < n_orb_; ++i) out << "1,";
  out << "\n ISYM=1,\n&END\n";
  char buf[96];
  for_each_eri([&](std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v) {
    std::snprintf(buf, sizeof buf, "%.17g %zu %zu %zu %zu\n", v, p + 1, q + 1, r + 1, s + 1);
    out << buf;
  });
  for (std::size_t p = 0; p < n_orb_; ++p) {
    for (std::size_t q = 0; q <= p; ++q) {
      const double v = h1(p, q);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g %zu %zu 0 0\n", v, p + 1, q + 1);
      out << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "%.17g 0 0 0 0\n", e_core_);
  out << buf;
  return out.str();
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::optional<int> header_int(const std::string& header, const char* key) {
  const std::regex re(std::string("(^|[^A-Z0-9_])") + key + R"(\s*=\s*([+-]?\d+))");
  std::smatch m;
  if (!std::regex_search(header, m, re)) return std::nullopt;
  return std::stoi(m[2].str());
}

// Splits the namelist header from the body. Accepts "&END" or "/" as terminator.
std::pair<std::string, std::string_view> split_header(std::string_view text) {
  const std::string up = upper(text);
  std::size_t end = up.find("&END");
  std::size_t body = std::string::npos;
  if (end != std::string::npos) {
    body = end + 4;
  } else {
    end = up.find('/');
    if (end != std::string::npos) body = end + 1;
  }
  if (up.find("&FCI") == std::string::npos || body == std::string::npos) {
    throw FormatError("FCIDUMP: missing '&FCI ... &END' namelist header");
  }
  return {up.substr(0, end), text.substr(body)};
}

std::array<int, 3> parse_header_fields(const std::string& header) {
  const auto norb = header_int(header, "NORB");
  const auto nelec = header_int(header, "NELEC");
  const auto ms2 = header_int(header, "MS2");
  if (!norb) throw FormatError("FCIDUMP header: missing NORB");
  if (!nelec) throw FormatError("FCIDUMP header: missing NELEC");
  if (!ms2) throw FormatError("FCIDUMP header: missing MS2");
  return {*norb, *nelec, *ms2};
}

std::pair<int, int> spin_counts(int nelec, int ms2) {
  if ((nelec + ms2) % 2 != 0) {
    throw FormatError("FCIDUMP header: NELEC+MS2 must be even (NELEC=" + std::to_string(nelec) +
                      ", MS2=" + std::to_string(ms2) + ")");
  }
  return {(nelec + ms2) / 2, (nelec - ms2) / 2};
}

double parse_value(std::string token, std::size_t line_no) {
  // Fortran writers sometimes emit 1.0D-03.
  std::replace(token.begin(), token.end(), 'D', 'E');
  std::replace(token.begin(), token.end(), 'd', 'e');
  double v = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw FormatError("line " + std::to_string(line_no) + ": non-numeric value '" + token + "'");
  }
  return v;
}

long parse_index(const std::string& token, std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad orbital index '" + token + "'");
  }
  return v;
}

}  // namespace

IntegralSet parse_fcidump(std::string_view text) {
  const auto [header, body] = split_header(text);
  const auto [norb, nelec, ms2] = parse_header_fields(header);
  if (norb <= 0) throw FormatError("FCIDUMP header: NORB must be positive");
  const auto [n_alpha, n_beta] = spin_counts(nelec, ms2);
  if (n_alpha < 0 || n_beta < 0 || n_alpha > norb || n_beta > norb) {
    throw FormatError("FCIDUMP header: electron counts incompatible with NORB");
  }
  IntegralSet ints(static_cast<std::size_t>(norb), n_alpha, n_beta);

  // Line numbers count from the start of the file.
  std::size_t line_no = static_cast<std::size_t>(
      std::count(text.begin(), text.begin() + (text.size() - body.size()), '\n')) + 1;
  std::istringstream in{std::string(body)};
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (!first_line) ++line_no;
    first_line = false;
    std::istringstream fields(line);
    std::string tok[5];
    int n = 0;
    while (n < 5 && fields >> tok[n]) ++n;
    if (n == 0) continue;
    std::string extra;
    if (n < 5 || (fields >> extra)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'value i j k l'");
    }
    const double value = parse_value(tok[0], line_no);
    long idx[4];
    for (int k = 0; k < 4; ++k) {
      idx[k] = parse_index(tok[k + 1], line_no);
      if (idx[k] < 0 || idx[k] > norb) {
        throw FormatError("line " + std::to_string(line_no) + ": index " + tok[k + 1] +
                          " outside [0, NORB=" + std::to_string(norb) + "]");
      }
    }
    const auto [i, j, k, l] = idx;
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.set_e_core(value);
    } else if (k == 0 && l == 0) {
      if (i == 0 || j == 0) {
        throw FormatError("line " + std::to_string(line_no) + ": one-body record needs i,j >= 1");
      }
      ints.set_h1(i - 1, j - 1, value);
    } else if (i == 0 || j == 0 || k == 0 || l == 0) {
      // Orbital-energy records ("e i 0 0 0") carry no Hamiltonian data.
      continue;
    } else {
      ints.set_eri(i - 1, j - 1, k - 1, l - 1, value);
    }
  }
  return ints;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

IntegralSet read_fcidump(const std::string& path) { return parse_fcidump(read_text_file(path)); }

std::array<int, 3> read_fcidump_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string text;
  std::string line;
  while (std::getline(in, line)) {
    text += line;
    text += '\n';
    const std::string up = upper(line);
    if (up.find("&END") != std::string::npos || up.find('/') != std::string::npos) break;
  }
  const auto [header, body] = split_header(text);
  (void)body;
  auto fields = parse_header_fields(header);
  spin_counts(fields[1], fields[2]);
  return fields;
}

DipoleIntegrals parse_dipole_file(std::string_view text, std::size_t n_orb) {
  DipoleIntegrals d;
  for (auto& c : d.components) c = Eigen::MatrixXd::Zero(n_orb, n_orb);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key) || key[0] == '#') continue;
    if (key == "nuc") {
      std::string t[3];
      if (!(fields >> t[0] >> t[1] >> t[2])) {
        throw FormatError("line " + std::to_string(line_no) + ": expected 'nuc dx dy dz'");
      }
      for (int a = 0; a < 3; ++a) d.nuclear[a] = parse_value(t[a], line_no);
      continue;
    }
    int axis = -1;
    if (key == "x" || key == "X") axis = 0;
    if (key == "y" || key == "Y") axis = 1;
    if (key == "z" || key == "Z") axis = 2;
    if (axis < 0) throw FormatError("line " + std::to_string(line_no) + ": unknown axis '" + key + "'");
    std::string sp, sq, sv;
    if (!(fields >> sp >> sq >> sv)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'axis p q value'");
    }
    const long p = parse_index(sp, line_no);
    const long q = parse_index(sq, line_no);
    if (p < 1 || q < 1 || static_cast<std::size_t>(p) > n_orb ||
        static_cast<std::size_t>(q) > n_orb) {
      throw FormatError("line " + std::to_string(line_no) + ": orbital index out of range");
    }
    const double v = parse_value(sv, line_no);
    d.components[axis](p - 1, q - 1) = v;
    d.components[axis](q - 1, p - 1) = v;
  }
  return d;
}

DipoleIntegrals read_dipole_file(const std::string& path, std::size_t n_orb) {
  return parse_dipole_file(read_text_file(path), n_orb);
}

}  // namespace hivqe
