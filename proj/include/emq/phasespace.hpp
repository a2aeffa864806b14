#pragma once

#include "emq/quad.hpp"

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace emq {

enum class SymKind { Coord, Momentum, AuxCoord, AuxMomentum, Param };

struct SymbolInfo {
    std::string name;
    SymKind kind;
    int partner;   // conjugate symbol id, -1 for parameters
    int pair;      // 0-based pair index within its (q,p) or (qb,pb) family, -1 for parameters
};

// Symbol table for one phase space.  Two flavors:
//   doubled: coordinates q_a with momenta p_<q>, plus auxiliaries qb_<q>, pb_<q>
//   plain:   explicit (coordinate, momentum) pairs, e.g. the frame after a canonical map
// Symbol ids are dense; the first phase_dim() ids follow the phase-vector layout
// (q..., p..., qb..., pb...) resp. (Q..., P...), parameters come last.
class PhaseSpace : public std::enable_shared_from_this<PhaseSpace> {
public:
    static std::shared_ptr<const PhaseSpace>
    doubled(const std::vector<std::string>& coords, const std::vector<std::string>& params = {});

    static std::shared_ptr<const PhaseSpace>
    plain(const std::vector<std::pair<std::string, std::string>>& qp_names,
          const std::vector<std::string>& params = {});

    bool is_doubled() const { return doubled_; }
    int n_pairs() const { return npairs_; }      // N: canonical pairs per family
    int phase_dim() const { return doubled_ ? 4 * npairs_ : 2 * npairs_; }
    int size() const { return int(info_.size()); }

    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }
    int require(const std::string& name) const {
        int id = find(name);
        if (id < 0) throw EmqError("unknown symbol '" + name + "'");
        return id;
    }
    const SymbolInfo& info(int id) const { return info_.at(size_t(id)); }
    const std::string& name(int id) const { return info(id).name; }
    bool is_param(int id) const { return info(id).kind == SymKind::Param; }
    bool is_dynamical(int id) const { return !is_param(id); }

    int coord(int a) const { return a; }
    int momentum(int a) const { return npairs_ + a; }
    int aux_coord(int a) const {
        check_doubled();
        return 2 * npairs_ + a;
    }
    int aux_momentum(int a) const {
        check_doubled();
        return 3 * npairs_ + a;
    }

    // phase-vector slot for symbol id (identity for ids < phase_dim)
    int phase_symbol(int slot) const { return slot; }

    const std::vector<int>& param_ids() const { return param_ids_; }

    // all (coordinate, momentum) id pairs entering the bracket
    const std::vector<std::pair<int, int>>& bracket_pairs() const { return pairs_; }

private:
    PhaseSpace() = default;
    void add(std::string name, SymKind kind, int partner, int pair);
    void check_doubled() const {
        if (!doubled_) throw EmqError("auxiliary symbols only exist in a doubled space");
    }

    bool doubled_ = false;
    int npairs_ = 0;
    std::vector<SymbolInfo> info_;
    std::map<std::string, int> index_;
    std::vector<int> param_ids_;
    std::vector<std::pair<int, int>> pairs_;
};

} // namespace emq
