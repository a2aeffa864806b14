#include "emq/phasespace.hpp"

#include <cctype>

namespace emq {

namespace {

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return s != "exp" && s != "sqrt2";
}

} // namespace

void PhaseSpace::add(std::string name, SymKind kind, int partner, int pair) {
    if (!valid_identifier(name))
        throw EmqError("invalid symbol name '" + name + "'");
    if (index_.count(name))
        throw EmqError("duplicate symbol name '" + name + "'");
    index_[name] = int(info_.size());
    info_.push_back({std::move(name), kind, partner, pair});
}

std::shared_ptr<const PhaseSpace>
PhaseSpace::doubled(const std::vector<std::string>& coords, const std::vector<std::string>& params) {
    if (coords.empty()) throw EmqError("phase space needs at least one coordinate");
    auto sp = std::shared_ptr<PhaseSpace>(new PhaseSpace());
    sp->doubled_ = true;
    int n = int(coords.size());
    sp->npairs_ = n;
    for (int a = 0; a < n; ++a)
        sp->add(coords[size_t(a)], SymKind::Coord, n + a, a);
    for (int a = 0; a < n; ++a)
        sp->add("p_" + coords[size_t(a)], SymKind::Momentum, a, a);
    for (int a = 0; a < n; ++a)
        sp->add("qb_" + coords[size_t(a)], SymKind::AuxCoord, 3 * n + a, a);
    for (int a = 0; a < n; ++a)
        sp->add("pb_" + coords[size_t(a)], SymKind::AuxMomentum, 2 * n + a, a);
    for (const auto& p : params)
        sp->add(p, SymKind::Param, -1, -1);
    for (int i = 0; i < sp->size(); ++i)
        if (sp->info_[size_t(i)].kind == SymKind::Param) sp->param_ids_.push_back(i);
    for (int a = 0; a < n; ++a) sp->pairs_.emplace_back(a, n + a);
    for (int a = 0; a < n; ++a) sp->pairs_.emplace_back(2 * n + a, 3 * n + a);
    return sp;
}

std::shared_ptr<const PhaseSpace>
PhaseSpace::plain(const std::vector<std::pair<std::string, std::string>>& qp_names,
                  const std::vector<std::string>& params) {
    if (qp_names.empty()) throw EmqError("phase space needs at least one pair");
    auto sp = std::shared_ptr<PhaseSpace>(new PhaseSpace());
    sp->doubled_ = false;
    int n = int(qp_names.size());
    sp->npairs_ = n;
    for (int a = 0; a < n; ++a)
        sp->add(qp_names[size_t(a)].first, SymKind::Coord, n + a, a);
    for (int a = 0; a < n; ++a)
        sp->add(qp_names[size_t(a)].second, SymKind::Momentum, a, a);
    for (const auto& p : params)
        sp->add(p, SymKind::Param, -1, -1);
    for (int i = 0; i < sp->size(); ++i)
        if (sp->info_[size_t(i)].kind == SymKind::Param) sp->param_ids_.push_back(i);
    for (int a = 0; a < n; ++a) sp->pairs_.emplace_back(a, n + a);
    return sp;
}

} // namespace emq
