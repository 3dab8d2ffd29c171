#include "qrf/instance.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qrf {

namespace {

// ---------------------------------------------------------------------------
// tiny token / nested-list machinery
// ---------------------------------------------------------------------------

struct Node {
    bool is_number = false;
    double number = 0.0;
    std::vector<Node> items; // when !is_number
};

struct Cursor {
    const std::vector<std::string>& toks;
    std::size_t pos = 0;
    std::size_t line;

    bool done() const { return pos >= toks.size(); }
    const std::string& peek() const {
        static const std::string empty;
        return done() ? empty : toks[pos];
    }
    std::string next() {
        if (done())
            throw ParseError{"unexpected end of line", line};
        return toks[pos++];
    }
};

bool looks_numeric(const std::string& t) {
    return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-' ||
                          t[0] == '+' || t[0] == '.');
}

double to_number(const std::string& t, std::size_t line) {
    try {
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size())
            throw std::invalid_argument(t);
        return v;
    } catch (...) {
        throw ParseError{"not a number: '" + t + "'", line};
    }
}

Node parse_node(Cursor& c) {
    if (c.peek() == "[") {
        c.next();
        Node n;
        while (c.peek() != "]") {
            if (c.done())
                throw ParseError{"missing ']'", c.line};
            n.items.push_back(parse_node(c));
        }
        c.next(); // ]
        return n;
    }
    Node n;
    n.is_number = true;
    n.number = to_number(c.next(), c.line);
    return n;
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> toks;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            toks.push_back(cur);
            cur.clear();
        }
    };
    for (char ch : s) {
        if (ch == '#')
            break;
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
            flush();
        } else if (ch == '[' || ch == ']' || ch == '=') {
            flush();
            toks.push_back(std::string(1, ch));
        } else {
            cur.push_back(ch);
        }
    }
    flush();
    return toks;
}

std::vector<double> flat_numbers(const Node& n, std::size_t line) {
    if (n.is_number)
        return {n.number};
    std::vector<double> out;
    for (const Node& item : n.items) {
        if (!item.is_number)
            throw ParseError{"expected a flat list of numbers", line};
        out.push_back(item.number);
    }
    return out;
}

long to_long(double v, std::size_t line) {
    const long r = std::lround(v);
    if (std::abs(v - static_cast<double>(r)) > 1e-9)
        throw ParseError{"expected an integer, got " + std::to_string(v), line};
    return r;
}

cplx modulus_phase(const Node& n, std::size_t line) {
    if (n.is_number || n.items.size() != 2 || !n.items[0].is_number || !n.items[1].is_number)
        throw ParseError{"expected a [modulus, phase] pair", line};
    return std::polar(n.items[0].number, n.items[1].number);
}

std::vector<Charge> charges_from_node(const Node& n, std::size_t nfactors, std::size_t line) {
    std::vector<Charge> out;
    if (n.is_number)
        throw ParseError{"expected a charge list", line};
    for (const Node& item : n.items) {
        Charge c;
        if (item.is_number) {
            if (nfactors != 1)
                throw ParseError{"charge needs one component per group factor", line};
            c.components = {to_long(item.number, line)};
        } else {
            for (const Node& comp : item.items) {
                if (!comp.is_number)
                    throw ParseError{"malformed charge tuple", line};
                c.components.push_back(to_long(comp.number, line));
            }
            if (c.components.size() != nfactors)
                throw ParseError{"charge needs one component per group factor", line};
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace

InstanceSpec parse_instance(const std::string& text) {
    InstanceSpec spec;
    bool saw_group = false, saw_frame = false;

    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto toks = tokenize(raw);
        if (toks.empty())
            continue;
        // split at '='
        std::size_t eq = 0;
        while (eq < toks.size() && toks[eq] != "=")
            ++eq;
        if (eq == toks.size() || eq == 0)
            throw ParseError{"expected 'key = value'", lineno};
        std::vector<std::string> key(toks.begin(), toks.begin() + eq);
        std::vector<std::string> val(toks.begin() + eq + 1, toks.end());
        Cursor c{val, 0, lineno};

        if (key[0] == "group" && key.size() == 1) {
            std::string kind = c.next();
            if (kind == "u1") {
                spec.group = SymmetryGroup::u1();
            } else if (kind == "z") {
                std::vector<long> moduli;
                while (!c.done())
                    moduli.push_back(to_long(to_number(c.next(), lineno), lineno));
                if (moduli.empty())
                    throw ParseError{"group = z needs at least one modulus", lineno};
                spec.group = SymmetryGroup::finite(moduli);
            } else {
                throw ParseError{"unknown group kind '" + kind + "'", lineno};
            }
            saw_group = true;
        } else if (key[0] == "frame" && key.size() == 1) {
            std::string what = c.next();
            if (what == "trivial") {
                spec.frame_kind = InstanceSpec::FrameKind::Trivial;
            } else if (what == "regular") {
                spec.frame_kind = InstanceSpec::FrameKind::Regular;
            } else if (what == "charges") {
                spec.frame_kind = InstanceSpec::FrameKind::Charges;
                spec.frame_charges =
                    charges_from_node(parse_node(c), spec.group.num_factors(), lineno);
                if (!c.done()) {
                    if (c.next() != "amplitudes")
                        throw ParseError{"expected 'amplitudes' after the charge list", lineno};
                    Node amps = parse_node(c);
                    for (const Node& a : amps.items)
                        spec.frame_amplitudes.push_back(modulus_phase(a, lineno));
                }
            } else {
                throw ParseError{"frame must be trivial, regular or charges [...]", lineno};
            }
            saw_frame = true;
        } else if (key[0] == "system" && key.size() == 2) {
            if (c.next() != "charges")
                throw ParseError{"system value must be 'charges [...]'", lineno};
            SystemSpec sys;
            sys.name = key[1];
            sys.charges = charges_from_node(parse_node(c), spec.group.num_factors(), lineno);
            if (sys.charges.empty())
                throw ParseError{"system needs at least one charge", lineno};
            spec.systems.push_back(std::move(sys));
        } else if (key[0] == "state" && key.size() == 2 && key[1] == "frame") {
            spec.has_frame_state = true;
            while (!c.done()) {
                std::string field = c.next();
                if (field == "orientations") {
                    Node n = parse_node(c);
                    for (const Node& o : n.items) {
                        if (o.is_number) {
                            spec.state_orientations_u1.push_back(o.number);
                        } else {
                            FiniteElement e;
                            for (const Node& comp : o.items)
                                e.push_back(to_long(comp.number, lineno));
                            spec.state_orientations_finite.push_back(std::move(e));
                        }
                    }
                } else if (field == "coefficients") {
                    Node n = parse_node(c);
                    for (const Node& a : n.items)
                        spec.state_coefficients.push_back(modulus_phase(a, lineno));
                } else {
                    throw ParseError{"unknown state frame field '" + field + "'", lineno};
                }
            }
        } else if (key[0] == "state" && key.size() == 2) {
            std::string field = c.next();
            if (field == "diag") {
                auto vals = flat_numbers(parse_node(c), lineno);
                ComplexMatrix m(vals.size(), vals.size());
                for (std::size_t i = 0; i < vals.size(); ++i)
                    m(i, i) = vals[i];
                spec.system_states[key[1]] = std::move(m);
            } else if (field == "matrix") {
                Node rows = parse_node(c);
                const std::size_t d = rows.items.size();
                ComplexMatrix m(d, d);
                for (std::size_t i = 0; i < d; ++i) {
                    if (rows.items[i].items.size() != d)
                        throw ParseError{"state matrix must be square", lineno};
                    for (std::size_t j = 0; j < d; ++j)
                        m(i, j) = modulus_phase(rows.items[i].items[j], lineno);
                }
                spec.system_states[key[1]] = std::move(m);
            } else {
                throw ParseError{"state value must be 'diag [...]' or 'matrix [...]'", lineno};
            }
        } else if (key[0] == "povm" && key.size() == 1) {
            std::string kind = c.next();
            if (kind != "charge_basis")
                throw ParseError{"only 'povm = charge_basis' is supported", lineno};
            spec.povm_charge_basis = true;
        } else if (key[0] == "seed" && key.size() == 1) {
            spec.seed = static_cast<std::uint64_t>(to_long(to_number(c.next(), lineno), lineno));
        } else if (key[0] == "tol_rank") {
            spec.tol.rank_tol = to_number(c.next(), lineno);
            if (spec.tol.rank_tol <= 0 || spec.tol.rank_tol > 1e-6)
                throw ParseError{"tol_rank must lie in (0, 1e-6]", lineno};
        } else if (key[0] == "tol_eq") {
            spec.tol.equality_tol = to_number(c.next(), lineno);
        } else if (key[0] == "tol_degeneracy") {
            spec.tol.degeneracy_tol = to_number(c.next(), lineno);
        } else if (key[0] == "format") {
            spec.format = c.next();
            if (spec.format != "text" && spec.format != "machine")
                throw ParseError{"format must be text or machine", lineno};
        } else {
            throw ParseError{"unknown key '" + key[0] + "'", lineno};
        }
        if (!c.done())
            throw ParseError{"trailing tokens after value", lineno};
    }

    if (!saw_group)
        throw ParseError{"missing 'group = ...'", 0};
    if (!saw_frame)
        throw ParseError{"missing 'frame = ...'", 0};
    if (spec.systems.empty())
        throw ParseError{"need at least one 'system <name> = charges [...]'", 0};
    return spec;
}

InstanceSpec parse_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError{"cannot open instance file '" + path + "'", 0};
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str());
}

Qrf InstanceSpec::build_frame() const {
    switch (frame_kind) {
    case FrameKind::Trivial:
        return trivial_qrf(group);
    case FrameKind::Regular:
        return regular_qrf(group);
    case FrameKind::Charges: {
        std::vector<cplx> amps = frame_amplitudes;
        if (amps.empty()) {
            const double mod = 1.0 / std::sqrt(static_cast<double>(frame_charges.size()));
            amps.assign(frame_charges.size(), cplx(mod, 0.0));
        }
        return make_rank_one_qrf(group, frame_charges, amps, tol);
    }
    }
    throw std::invalid_argument("unreachable frame kind");
}

UnitaryRep InstanceSpec::build_system_rep() const {
    UnitaryRep rep = make_rep(group, systems.front().charges);
    for (std::size_t i = 1; i < systems.size(); ++i)
        rep = kron_rep(rep, make_rep(group, systems[i].charges));
    return rep;
}

std::size_t InstanceSpec::system_dim() const {
    std::size_t d = 1;
    for (const SystemSpec& s : systems)
        d *= s.charges.size();
    return d;
}

ComplexMatrix InstanceSpec::build_frame_state() const {
    const Qrf frame = build_frame();
    if (!has_frame_state) {
        // default: the seed orientation state |e><e| normalized
        ComplexMatrix v(frame.dim(), 1);
        for (std::size_t i = 0; i < frame.dim(); ++i)
            v(i, 0) = frame.seed_amplitudes[i];
        double n2 = 0;
        for (std::size_t i = 0; i < frame.dim(); ++i)
            n2 += std::norm(v(i, 0));
        ComplexMatrix rho(frame.dim(), frame.dim());
        for (std::size_t i = 0; i < frame.dim(); ++i)
            for (std::size_t j = 0; j < frame.dim(); ++j)
                rho(i, j) = v(i, 0) * std::conj(v(j, 0)) / n2;
        return rho;
    }
    const std::size_t count = group.is_finite() ? state_orientations_finite.size()
                                                : state_orientations_u1.size();
    if (count == 0 || state_coefficients.size() != count)
        throw std::invalid_argument("frame state needs matching orientations and coefficients");
    ComplexMatrix v(frame.dim(), 1);
    for (std::size_t k = 0; k < count; ++k) {
        ComplexMatrix o = group.is_finite()
                              ? orientation_state(frame, state_orientations_finite[k])
                              : orientation_state(frame, state_orientations_u1[k]);
        o *= state_coefficients[k];
        v += o;
    }
    double n2 = 0;
    for (std::size_t i = 0; i < frame.dim(); ++i)
        n2 += std::norm(v(i, 0));
    if (n2 < 1e-14)
        throw std::invalid_argument("frame state vector is numerically zero");
    ComplexMatrix rho(frame.dim(), frame.dim());
    for (std::size_t i = 0; i < frame.dim(); ++i)
        for (std::size_t j = 0; j < frame.dim(); ++j)
            rho(i, j) = v(i, 0) * std::conj(v(j, 0)) / n2;
    return rho;
}

ComplexMatrix InstanceSpec::build_system_state() const {
    ComplexMatrix state = ComplexMatrix::identity(1);
    for (const SystemSpec& s : systems) {
        auto it = system_states.find(s.name);
        ComplexMatrix part;
        if (it == system_states.end()) {
            // maximally mixed by default
            part = ComplexMatrix::identity(s.charges.size());
            part *= cplx(1.0 / static_cast<double>(s.charges.size()), 0.0);
        } else {
            part = it->second;
            if (part.rows() != s.charges.size())
                throw std::invalid_argument("state for system '" + s.name +
                                            "' has mismatched dimension");
            if (!part.is_finite())
                throw std::invalid_argument("state for system '" + s.name +
                                            "' has non-finite entries");
            const double tr = part.trace().real();
            if (std::abs(tr - 1.0) > 1e-6)
                throw std::invalid_argument("state for system '" + s.name +
                                            "' does not have unit trace");
            if (distance(part, part.dagger()) > 1e-8)
                throw std::invalid_argument("state for system '" + s.name +
                                            "' is not Hermitian");
            EigResult eig = hermitian_eig(part);
            if (!eig.values.empty() && eig.values.front() < -1e-8)
                throw std::invalid_argument("state for system '" + s.name +
                                            "' is not positive semidefinite");
        }
        state = kron(state, part);
    }
    return state;
}

} // namespace qrf
