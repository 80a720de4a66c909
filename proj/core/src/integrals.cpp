#include "spinproj/integrals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace spinproj {

TwoElectronIntegrals::TwoElectronIntegrals(int n_orbitals) : L_(n_orbitals) {
    const std::size_t npair = static_cast<std::size_t>(L_) * (L_ + 1) / 2;
    data_.assign(npair * (npair + 1) / 2, 0.0);
}

std::size_t TwoElectronIntegrals::canonical_index(int p, int q, int r, int s) const {
    auto tri = [](std::size_t a, std::size_t b) { return a * (a + 1) / 2 + b; };
    const std::size_t pq = p >= q ? tri(p, q) : tri(q, p);
    const std::size_t rs = r >= s ? tri(r, s) : tri(s, r);
    return pq >= rs ? tri(pq, rs) : tri(rs, pq);
}

namespace {

void check_index(long idx, int norb, int line_no) {
    if (idx < 0 || idx > norb)
        throw ParseError("FCIDUMP line " + std::to_string(line_no)
                         + ": orbital index " + std::to_string(idx)
                         + " out of range [0, " + std::to_string(norb) + "]");
}

// Header tokens look like KEY=VALUE or KEY=V1,V2,...; values may carry a
// trailing comma. Terminated by &END or /.
std::map<std::string, std::string> parse_header(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string token;
    bool first = true;
    std::string pending_key;
    while (in >> token) {
        if (first) {
            if (token.rfind("&FCI", 0) != 0)
                throw ParseError("FCIDUMP header: expected &FCI, got '" + token + "'");
            first = false;
            if (token.size() > 4)
                token = token.substr(4);
            else
                continue;
        }
        if (token == "&END" || token == "/")
            return kv;
        while (!token.empty() && token.back() == ',')
            token.pop_back();
        if (token.empty())
            continue;
        auto eq = token.find('=');
        if (eq == std::string::npos) {
            // continuation of a list value (e.g. ORBSYM spread over lines)
            if (!pending_key.empty()) {
                kv[pending_key] += "," + token;
                continue;
            }
            throw ParseError("FCIDUMP header: malformed token '" + token + "'");
        }
        std::string key = token.substr(0, eq);
        std::transform(key.begin(), key.end(), key.begin(), ::toupper);
        kv[key] = token.substr(eq + 1);
        pending_key = key;
    }
    throw ParseError("FCIDUMP header: missing &END terminator");
}

long to_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("FCIDUMP header: bad integer for " + key + ": '" + s + "'");
    }
}

} // namespace

std::pair<SystemSpec, IntegralSet> parse_fcidump(std::istream& in) {
    auto kv = parse_header(in);
    if (!kv.count("NORB"))
        throw ParseError("FCIDUMP header: missing NORB");
    if (!kv.count("NELEC"))
        throw ParseError("FCIDUMP header: missing NELEC");
    const int norb = static_cast<int>(to_long(kv["NORB"], "NORB"));
    const int nelec = static_cast<int>(to_long(kv["NELEC"], "NELEC"));
    const int ms2 = kv.count("MS2") ? static_cast<int>(to_long(kv["MS2"], "MS2")) : 0;
    if (norb < 1)
        throw ParseError("FCIDUMP header: NORB must be >= 1");
    if ((nelec + ms2) % 2 != 0)
        throw ParseError("FCIDUMP header: NELEC and MS2 have different parity");

    SystemSpec spec;
    spec.n_orbitals = norb;
    spec.n_alpha = (nelec + ms2) / 2;
    spec.n_beta = (nelec - ms2) / 2;
    spec.ms2 = ms2;
    spec.validate();

    IntegralSet ints;
    ints.h = Eigen::MatrixXd::Zero(norb, norb);
    ints.v = TwoElectronIntegrals(norb);
    std::vector<bool> v_seen(ints.v.size(), false);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> h_seen =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(norb, norb, false);
    bool core_seen = false;

    std::string line;
    int line_no = 1; // header counted as one logical line
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        double value;
        long i, j, k, l;
        if (!(ls >> value))
            continue; // blank line
        if (!(ls >> i >> j >> k >> l))
            throw ParseError("FCIDUMP line " + std::to_string(line_no)
                             + ": expected 'value i j k l'");
        std::string trailing;
        if (ls >> trailing)
            throw ParseError("FCIDUMP line " + std::to_string(line_no)
                             + ": unexpected trailing token '" + trailing + "'");
        if (!std::isfinite(value))
            throw ParseError("FCIDUMP line " + std::to_string(line_no)
                             + ": non-finite value");
        check_index(i, norb, line_no);
        check_index(j, norb, line_no);
        check_index(k, norb, line_no);
        check_index(l, norb, line_no);
        if (i == 0 && j == 0 && k == 0 && l == 0) {
            if (core_seen && std::abs(value - ints.core_energy) > 1e-12)
                throw ParseError("FCIDUMP line " + std::to_string(line_no)
                                 + ": conflicting core energy entries");
            ints.core_energy = value;
            core_seen = true;
        } else if (k == 0 && l == 0) {
            if (j == 0)
                continue; // orbital-energy record; not part of the tensors
            if (i == 0)
                throw ParseError("FCIDUMP line " + std::to_string(line_no)
                                 + ": one-electron entry with i = 0");
            const int a = static_cast<int>(i) - 1, b = static_cast<int>(j) - 1;
            if (h_seen(a, b) && std::abs(ints.h(a, b) - value) > 1e-12)
                throw ParseError("FCIDUMP line " + std::to_string(line_no)
                                 + ": conflicting h(" + std::to_string(i) + ","
                                 + std::to_string(j) + ") entries");
            ints.h(a, b) = ints.h(b, a) = value;
            h_seen(a, b) = h_seen(b, a) = true;
        } else if (i == 0 || j == 0 || k == 0 || l == 0) {
            throw ParseError("FCIDUMP line " + std::to_string(line_no)
                             + ": partial zero indices in two-electron entry");
        } else {
            const int p = static_cast<int>(i) - 1, q = static_cast<int>(j) - 1;
            const int r = static_cast<int>(k) - 1, s = static_cast<int>(l) - 1;
            const std::size_t idx = ints.v.canonical_index(p, q, r, s);
            if (v_seen[idx] && std::abs(ints.v.get(p, q, r, s) - value) > 1e-12)
                throw ParseError("FCIDUMP line " + std::to_string(line_no)
                                 + ": conflicting (" + std::to_string(i) + " "
                                 + std::to_string(j) + "|" + std::to_string(k) + " "
                                 + std::to_string(l) + ") entries");
            ints.v.set(p, q, r, s, value);
            v_seen[idx] = true;
        }
    }
    spec.core_energy = ints.core_energy;
    return {spec, ints};
}

std::pair<SystemSpec, IntegralSet> parse_fcidump_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open FCIDUMP file: " + path);
    return parse_fcidump(in);
}

void write_fcidump(const SystemSpec& spec, const IntegralSet& ints, std::ostream& out) {
    const int L = ints.n_orbitals();
    out << "&FCI NORB=" << L << ",NELEC=" << spec.n_electrons()
        << ",MS2=" << spec.ms2 << ",\n  ORBSYM=";
    for (int i = 0; i < L; ++i)
        out << "1,";
    out << "\n  ISYM=1,\n&END\n";
    out << std::setprecision(17);
    auto tri = [](long a, long b) { return a * (a + 1) / 2 + b; };
    for (int p = 0; p < L; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r <= p; ++r)
                for (int s = 0; s <= r; ++s) {
                    if (tri(p, q) < tri(r, s))
                        continue;
                    const double v = ints.v.get(p, q, r, s);
                    if (v != 0.0)
                        out << v << ' ' << p + 1 << ' ' << q + 1 << ' '
                            << r + 1 << ' ' << s + 1 << '\n';
                }
    for (int p = 0; p < L; ++p)
        for (int q = 0; q <= p; ++q)
            if (ints.h(p, q) != 0.0)
                out << ints.h(p, q) << ' ' << p + 1 << ' ' << q + 1 << " 0 0\n";
    out << ints.core_energy << " 0 0 0 0\n";
}

SpinBlockedOperator hamiltonian_operator(const IntegralSet& ints) {
    const int L = ints.n_orbitals();
    SpinBlockedOperator op;
    op.n_orbitals = L;
    op.scalar = ints.core_energy;
    op.one_body[{Spin::Up, Spin::Up}] = ints.h;
    op.one_body[{Spin::Down, Spin::Down}] = ints.h;
    auto t = std::make_shared<Tensor4>(L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s)
                    (*t)(p, q, r, s) = ints.v.get(p, q, r, s);
    for (Spin a : {Spin::Up, Spin::Down})
        for (Spin b : {Spin::Up, Spin::Down})
            op.two_body[{a, a, b, b}] = {1.0, t};
    return op;
}

SpinBlockedOperator s2_operator(int n_orbitals) {
    if (n_orbitals < 1)
        throw DomainError("s2_operator: n_orbitals must be >= 1");
    const int L = n_orbitals;
    SpinBlockedOperator op;
    op.n_orbitals = L;
    op.one_body[{Spin::Up, Spin::Up}] =
        0.75 * Eigen::MatrixXd::Identity(L, L);
    op.one_body[{Spin::Down, Spin::Down}] =
        0.75 * Eigen::MatrixXd::Identity(L, L);
    // delta_pq delta_rs pattern shared by every two-body block
    auto dd = std::make_shared<Tensor4>(L);
    for (int p = 0; p < L; ++p)
        for (int r = 0; r < L; ++r)
            (*dd)(p, p, r, r) = 1.0;
    // z.z part: physical +-1/4 with parallel/antiparallel signs; entries are
    // doubled by the 1/2-template electron-exchange double count
    op.two_body[{Spin::Up, Spin::Up, Spin::Up, Spin::Up}] = {0.5, dd};
    op.two_body[{Spin::Down, Spin::Down, Spin::Down, Spin::Down}] = {0.5, dd};
    op.two_body[{Spin::Up, Spin::Up, Spin::Down, Spin::Down}] = {-0.5, dd};
    op.two_body[{Spin::Down, Spin::Down, Spin::Up, Spin::Up}] = {-0.5, dd};
    // spin-flip exchange realizing S+S- + S-S+
    op.two_body[{Spin::Up, Spin::Down, Spin::Down, Spin::Up}] = {1.0, dd};
    op.two_body[{Spin::Down, Spin::Up, Spin::Up, Spin::Down}] = {1.0, dd};
    return op;
}

namespace {

// four quarter transforms of V into the Q basis
Tensor4 project_tensor(const Tensor4& t, const Eigen::MatrixXd& Q) {
    const int L = t.L;
    const int d = static_cast<int>(Q.cols());
    // reshape contract: T1[a,q,r,s] = sum_p Q(p,a) t(p,q,r,s)
    std::vector<double> t1(static_cast<std::size_t>(d) * L * L * L, 0.0);
    for (int p = 0; p < L; ++p)
        for (int a = 0; a < d; ++a) {
            const double w = Q(p, a);
            if (w == 0.0)
                continue;
            const double* src = &t.data[static_cast<std::size_t>(p) * L * L * L];
            double* dst = &t1[static_cast<std::size_t>(a) * L * L * L];
            for (std::size_t x = 0; x < static_cast<std::size_t>(L) * L * L; ++x)
                dst[x] += w * src[x];
        }
    std::vector<double> t2(static_cast<std::size_t>(d) * d * L * L, 0.0);
    for (int a = 0; a < d; ++a)
        for (int q = 0; q < L; ++q)
            for (int b = 0; b < d; ++b) {
                const double w = Q(q, b);
                if (w == 0.0)
                    continue;
                const double* src = &t1[(static_cast<std::size_t>(a) * L + q) * L * L];
                double* dst = &t2[(static_cast<std::size_t>(a) * d + b) * L * L];
                for (std::size_t x = 0; x < static_cast<std::size_t>(L) * L; ++x)
                    dst[x] += w * src[x];
            }
    std::vector<double> t3(static_cast<std::size_t>(d) * d * d * L, 0.0);
    for (std::size_t ab = 0; ab < static_cast<std::size_t>(d) * d; ++ab)
        for (int r = 0; r < L; ++r)
            for (int c = 0; c < d; ++c) {
                const double w = Q(r, c);
                if (w == 0.0)
                    continue;
                const double* src = &t2[(ab * L + r) * L];
                double* dst = &t3[(ab * d + c) * L];
                for (int x = 0; x < L; ++x)
                    dst[x] += w * src[x];
            }
    Tensor4 out(d);
    for (std::size_t abc = 0; abc < static_cast<std::size_t>(d) * d * d; ++abc)
        for (int s = 0; s < L; ++s) {
            const double w0 = t3[abc * L + s];
            if (w0 == 0.0)
                continue;
            for (int e = 0; e < d; ++e)
                out.data[abc * d + e] += w0 * Q(s, e);
        }
    return out;
}

} // namespace

SpinBlockedOperator project_operator(const SpinBlockedOperator& op,
                                     const Eigen::MatrixXd& Q) {
    SpinBlockedOperator out;
    out.n_orbitals = static_cast<int>(Q.cols());
    out.scalar = op.scalar;
    for (const auto& [key, h] : op.one_body)
        out.one_body[key] = Q.transpose() * h * Q;
    std::map<const Tensor4*, std::shared_ptr<const Tensor4>> cache;
    for (const auto& [key, block] : op.two_body) {
        auto& projected = cache[block.tensor.get()];
        if (!projected)
            projected = std::make_shared<Tensor4>(project_tensor(*block.tensor, Q));
        out.two_body[key] = {block.coef, projected};
    }
    return out;
}

IntegralSet transform_integrals(const IntegralSet& ints, const Eigen::MatrixXd& Q) {
    const int L = ints.n_orbitals();
    if (Q.rows() != L || Q.cols() != L)
        throw DomainError("transform_integrals: Q must be square L x L");
    IntegralSet out;
    out.core_energy = ints.core_energy;
    out.h = Q.transpose() * ints.h * Q;
    Tensor4 dense(L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s)
                    dense(p, q, r, s) = ints.v.get(p, q, r, s);
    Tensor4 rot = project_tensor(dense, Q);
    out.v = TwoElectronIntegrals(L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r <= p; ++r)
                for (int s = 0; s <= r; ++s)
                    out.v.set(p, q, r, s, rot(p, q, r, s));
    return out;
}

} // namespace spinproj
