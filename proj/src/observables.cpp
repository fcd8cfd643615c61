#include "hallpump/observables.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace hallpump::observables {

using fock::apply_monomial_to_state;
using fock::FermiOp;

ExtensiveObservable ExtensiveObservable::restrict_to(const TorusLattice& lat,
                                                     const Region& z) const {
    ExtensiveObservable out;
    out.range = range;
    out.strength = strength;
    for (const auto& t : terms) {
        bool inside = true;
        for (int s : t.support)
            if (!z.contains(lat.site_at(s))) { inside = false; break; }
        if (inside) out.terms.push_back(t);
    }
    return out;
}

int support_diameter(const TorusLattice& lat, const std::vector<int>& support) {
    int d = 0;
    for (size_t a = 0; a < support.size(); ++a)
        for (size_t b = a + 1; b < support.size(); ++b)
            d = std::max(d, lat.distance(lat.site_at(support[a]), lat.site_at(support[b])));
    return d;
}

Region support_region(const TorusLattice& lat, const std::vector<int>& support) {
    std::vector<Site> sites;
    for (int s : support) sites.push_back(lat.site_at(s));
    return Region(std::move(sites));
}

MatrixXcd local_dense(const LocalTerm& term) {
    const int k = static_cast<int>(term.support.size());
    const uint64_t dim = uint64_t{1} << k;
    std::map<int, int> relabel;
    for (int i = 0; i < k; ++i) relabel[term.support[i]] = i;

    MatrixXcd mat = MatrixXcd::Zero(dim, dim);
    for (const auto& m : term.monomials) {
        Monomial local = m;
        for (auto& f : local.factors) {
            auto it = relabel.find(f.site_index);
            if (it == relabel.end())
                throw PreconditionError("monomial factor outside declared support");
            f.site_index = it->second;
        }
        for (uint64_t col = 0; col < dim; ++col) {
            uint64_t row;
            int sign;
            if (!apply_monomial_to_state(local, col, row, sign)) continue;
            mat(row, col) += local.coeff * static_cast<double>(sign);
        }
    }
    return mat;
}

namespace {
double operator_norm(const MatrixXcd& a) {
    // ||A|| = sqrt(max eig of A^dag A); fine at local-factor sizes
    MatrixXcd g = a.adjoint() * a;
    auto vals = kernels::heig_values(g);
    return std::sqrt(std::max(0.0, vals[vals.size() - 1]));
}
} // namespace

double term_difference_norm(const TorusLattice& lat, const ExtensiveObservable& a,
                            const ExtensiveObservable& b) {
    // Several terms may share a support (e.g. hopping + interaction on one
    // bond); merge them per support before comparing.
    std::map<std::vector<int>, LocalTerm> diff;
    for (const auto& t : a.terms) {
        auto& d = diff[t.support];
        d.support = t.support;
        d.monomials.insert(d.monomials.end(), t.monomials.begin(), t.monomials.end());
    }
    for (const auto& t : b.terms) {
        auto& d = diff[t.support];
        d.support = t.support;
        for (auto m : t.monomials) {
            m.coeff = -m.coeff;
            d.monomials.push_back(m);
        }
    }
    double worst = 0.0;
    for (const auto& [sup, term] : diff) worst = std::max(worst, operator_norm(local_dense(term)));
    return worst;
}

ValidationReport validate_extensive(const TorusLattice& lat, const ExtensiveObservable& obs) {
    ValidationReport rep;
    for (size_t i = 0; i < obs.terms.size(); ++i) {
        const auto& t = obs.terms[i];
        const int diam = support_diameter(lat, t.support);
        rep.measured_range = std::max(rep.measured_range, diam);
        if (diam > obs.range) {
            rep.ok = false;
            rep.violations.push_back("term " + std::to_string(i) + " has diameter " +
                                     std::to_string(diam) + " > declared range " +
                                     std::to_string(obs.range));
        }
        MatrixXcd dense = local_dense(t);
        const double herm = (dense - dense.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-12) {
            rep.ok = false;
            rep.violations.push_back("term " + std::to_string(i) + " is not Hermitian (defect " +
                                     std::to_string(herm) + ")");
        }
        const double nrm = operator_norm(dense);
        rep.measured_strength = std::max(rep.measured_strength, nrm);
        if (nrm > obs.strength + 1e-12) {
            rep.ok = false;
            rep.violations.push_back("term " + std::to_string(i) + " has norm " +
                                     std::to_string(nrm) + " > declared strength " +
                                     std::to_string(obs.strength));
        }
        for (const auto& m : t.monomials) {
            if (m.particle_delta() != 0) {
                rep.ok = false;
                rep.violations.push_back("term " + std::to_string(i) +
                                         " violates charge conservation");
                break;
            }
        }
    }
    return rep;
}

int charge_weight(const Monomial& m, const TorusLattice& lat, const Region& z) {
    int w = 0;
    for (const auto& f : m.factors) {
        if (!z.contains(lat.site_at(f.site_index))) continue;
        w += f.dagger ? 1 : -1;
    }
    return w;
}

BoundaryCommutator boundary_commutator(const TorusLattice& lat, const ExtensiveObservable& s,
                                       const Region& z) {
    for (const auto& t : s.terms)
        for (const auto& m : t.monomials)
            if (m.particle_delta() != 0)
                throw PreconditionError("boundary commutator requires a charge conserving input");

    BoundaryCommutator out;
    out.support_verified = true;
    const Region zc = lattice::region_complement(lat, z);
    for (const auto& t : s.terms) {
        LocalTerm c;
        c.support = t.support;
        for (const auto& m : t.monomials) {
            // [M, Q_Z] = (#annihilations in Z - #creations in Z) M
            const int w = -charge_weight(m, lat, z);
            if (w == 0) continue;
            Monomial cm = m;
            cm.coeff *= static_cast<double>(w);
            c.monomials.push_back(cm);
        }
        if (c.monomials.empty()) continue;
        const Region sup = support_region(lat, c.support);
        if (lattice::region_intersection(sup, z).empty() ||
            lattice::region_distance(lat, sup, zc) > 1 + s.range)
            out.support_verified = false;
        out.terms.push_back(std::move(c));
    }
    return out;
}

CurrentSplit current_decomposition(const TorusLattice& lat, const ExtensiveObservable& s,
                                   const Region& nu, const Region& nu_minus,
                                   const Region& nu_plus) {
    BoundaryCommutator comm = boundary_commutator(lat, s, nu);
    CurrentSplit split;
    for (auto& t : comm.terms) {
        // j(X) = i [Phi(X), Q_nu]
        for (auto& m : t.monomials) m.coeff *= cplx{0.0, 1.0};
        const Region sup = support_region(lat, t.support);
        const int dm = lattice::region_distance(lat, sup, nu_minus);
        const int dp = lattice::region_distance(lat, sup, nu_plus);
        if (dm == dp)
            throw PreconditionError(
                "current term equidistant from both boundaries; lattice too small for the "
                "interaction range");
        if (dm < dp) {
            split.minus_terms.push_back(std::move(t));
            split.minus_distance.push_back(dm);
        } else {
            split.plus_terms.push_back(std::move(t));
        }
    }
    return split;
}

HamiltonianFamily::HamiltonianFamily(const TorusLattice& lat, ExtensiveObservable base,
                                     Region strip, Region cut_line)
    : lat_(&lat), base_(std::move(base)), strip_(std::move(strip)), cut_line_(std::move(cut_line)) {
    for (const auto& t : base_.terms)
        for (const auto& m : t.monomials)
            if (m.particle_delta() != 0)
                throw PreconditionError("twist family requires a charge conserving Hamiltonian");
}

bool HamiltonianFamily::term_crosses_cut(const LocalTerm& t) const {
    bool meets_line = false, meets_comp = false;
    for (int s : t.support) {
        if (cut_line_.contains(lat_->site_at(s)))
            meets_line = true;
        else
            meets_comp = true;
    }
    return meets_line && meets_comp;
}

ExtensiveObservable HamiltonianFamily::at_phi(double phi) const {
    ExtensiveObservable out;
    out.range = base_.range;
    out.strength = base_.strength;
    out.terms = base_.terms;
    for (auto& t : out.terms) {
        if (!term_crosses_cut(t)) continue;
        for (auto& m : t.monomials) {
            const int w = charge_weight(m, *lat_, strip_);
            if (w != 0) m.coeff *= std::polar(1.0, phi * w);
        }
    }
    return out;
}

ExtensiveObservable HamiltonianFamily::d_phi(double phi) const {
    ExtensiveObservable out;
    out.range = base_.range;
    out.strength = base_.strength;
    for (const auto& t : base_.terms) {
        if (!term_crosses_cut(t)) continue;
        LocalTerm d;
        d.support = t.support;
        for (const auto& m : t.monomials) {
            const int w = charge_weight(m, *lat_, strip_);
            if (w == 0) continue;
            Monomial dm = m;
            dm.coeff *= cplx{0.0, static_cast<double>(w)} * std::polar(1.0, phi * w);
            d.monomials.push_back(dm);
        }
        if (!d.monomials.empty()) out.terms.push_back(std::move(d));
    }
    return out;
}

ExtensiveObservable HamiltonianFamily::antitwist_at(double phi) const {
    ExtensiveObservable out;
    out.range = base_.range;
    out.strength = base_.strength;
    out.terms = base_.terms;
    for (auto& t : out.terms)
        for (auto& m : t.monomials) {
            const int w = charge_weight(m, *lat_, strip_);
            if (w != 0) m.coeff *= std::polar(1.0, phi * w);
        }
    return out;
}

CsrMatrix assemble_terms(const std::vector<LocalTerm>& terms, const SectorBasis& basis) {
    const int64_t dim = static_cast<int64_t>(basis.dim());
    const int nchunks = 64;
    std::vector<kernels::CooBuilder> part(nchunks);

#pragma omp parallel for schedule(static)
    for (int chunk = 0; chunk < nchunks; ++chunk) {
        auto& coo = part[chunk];
        const int64_t lo = dim * chunk / nchunks;
        const int64_t hi = dim * (chunk + 1) / nchunks;
        for (int64_t colIdx = lo; colIdx < hi; ++colIdx) {
            const uint64_t state = basis.state(colIdx);
            for (const auto& t : terms)
                for (const auto& m : t.monomials) {
                    uint64_t target;
                    int sign;
                    if (!apply_monomial_to_state(m, state, target, sign)) continue;
                    coo.add(static_cast<int64_t>(basis.index_of(target)), colIdx,
                            m.coeff * static_cast<double>(sign));
                }
        }
    }

    kernels::CooBuilder all;
    all.rows = dim;
    all.cols = dim;
    for (const auto& p : part) {
        all.r.insert(all.r.end(), p.r.begin(), p.r.end());
        all.c.insert(all.c.end(), p.c.begin(), p.c.end());
        all.v.insert(all.v.end(), p.v.begin(), p.v.end());
    }
    return all.to_csr(0.0);
}

CsrMatrix assemble(const ExtensiveObservable& obs, const SectorBasis& basis) {
    return assemble_terms(obs.terms, basis);
}

cplx terms_expectation(const std::vector<LocalTerm>& terms, const SectorBasis& basis,
                       const Eigen::VectorXcd& v) {
    cplx acc{0.0, 0.0};
    for (const auto& t : terms)
        for (const auto& m : t.monomials) {
            for (int64_t i = 0; i < v.size(); ++i) {
                if (v[i] == cplx{0.0, 0.0}) continue;
                uint64_t target;
                int sign;
                if (!apply_monomial_to_state(m, basis.state(i), target, sign)) continue;
                acc += std::conj(v[static_cast<int64_t>(basis.index_of(target))]) * m.coeff *
                       static_cast<double>(sign) * v[i];
            }
        }
    return acc;
}

namespace {
std::string hexfloat(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}
} // namespace

void write_interactions(std::ostream& os, const TorusLattice& lat,
                        const ExtensiveObservable& obs) {
    os << "hallpump-interactions v1\n";
    os << "L " << lat.L() << "\n";
    os << "range " << obs.range << "\n";
    os << "strength " << hexfloat(obs.strength) << "\n";
    os << "nterms " << obs.terms.size() << "\n";
    for (const auto& t : obs.terms) {
        os << "term support " << t.support.size();
        for (int s : t.support) {
            Site site = lat.site_at(s);
            os << " (" << site.x1 << "," << site.x2 << ")";
        }
        os << "\n";
        for (const auto& m : t.monomials) {
            os << "mono " << hexfloat(m.coeff.real()) << " " << hexfloat(m.coeff.imag()) << " "
               << m.factors.size();
            for (const auto& f : m.factors) {
                Site site = lat.site_at(f.site_index);
                os << " " << (f.dagger ? '+' : '-') << "(" << site.x1 << "," << site.x2 << ")";
            }
            os << "\n";
        }
    }
}

namespace {
Site parse_site(const std::string& tok, size_t off) {
    int x1, x2;
    if (std::sscanf(tok.c_str() + off, "(%d,%d)", &x1, &x2) != 2)
        throw PreconditionError("malformed site token: " + tok);
    return {x1, x2};
}
} // namespace

ExtensiveObservable read_interactions(std::istream& is, const TorusLattice& lat) {
    std::string line;
    auto next = [&]() {
        if (!std::getline(is, line)) throw PreconditionError("truncated interaction file");
        return line;
    };
    if (next() != "hallpump-interactions v1")
        throw PreconditionError("unrecognized interaction file header");
    int L = 0;
    std::sscanf(next().c_str(), "L %d", &L);
    if (L != lat.L()) throw PreconditionError("interaction file lattice size mismatch");

    ExtensiveObservable obs;
    std::sscanf(next().c_str(), "range %d", &obs.range);
    {
        char buf[64];
        std::sscanf(next().c_str(), "strength %63s", buf);
        obs.strength = std::strtod(buf, nullptr);
    }
    size_t nterms = 0;
    std::sscanf(next().c_str(), "nterms %zu", &nterms);

    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "term") {
            LocalTerm t;
            std::string sup;
            size_t n;
            ls >> sup >> n;
            for (size_t i = 0; i < n; ++i) {
                std::string tok;
                ls >> tok;
                t.support.push_back(lat.site_index(parse_site(tok, 0)));
            }
            std::sort(t.support.begin(), t.support.end());
            obs.terms.push_back(std::move(t));
        } else if (word == "mono") {
            if (obs.terms.empty()) throw PreconditionError("monomial before any term");
            std::string re, im;
            size_t n;
            ls >> re >> im >> n;
            Monomial m;
            m.coeff = {std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr)};
            for (size_t i = 0; i < n; ++i) {
                std::string tok;
                ls >> tok;
                FermiOp f;
                f.dagger = tok[0] == '+';
                f.site_index = lat.site_index(parse_site(tok, 1));
                m.factors.push_back(f);
            }
            obs.terms.back().monomials.push_back(std::move(m));
        } else if (!word.empty()) {
            throw PreconditionError("unexpected record: " + word);
        }
    }
    if (obs.terms.size() != nterms)
        throw PreconditionError("term count mismatch in interaction file");
    return obs;
}

} // namespace hallpump::observables
