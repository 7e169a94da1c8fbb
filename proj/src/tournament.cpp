/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <cmath>

#include "confluxlab/error.hpp"
#include "confluxlab/factor.hpp"

namespace confluxlab::factor {

namespace {

// True when candidate a should be preferred over b at column k.
bool better(double va, long long ia, double vb, long long ib) {
    const double a = std::fabs(va);
    const double b = std::fabs(vb);
    if (a != b) return a > b;
    const bool real_a = ia >= 0;
    const bool real_b = ib >= 0;
    if (real_a != real_b) return real_a;
    return ia < ib;
}

sim::Payload to_payload(const DenseMatrix& m) { return m.data; }

DenseMatrix from_payload(const sim::Payload& p, std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    m.data = p;
    return m;
}

}  // namespace

Selection select_pivots(const DenseMatrix& block, const std::vector<long long>& ids, int v) {
    if (ids.size() != block.rows) throw DomainError("select_pivots: one id per row is required");
    const std::size_t vv = static_cast<std::size_t>(v);
    if (block.cols < vv) throw DomainError("select_pivots: block narrower than v");

    // Pad with zero rows so that v rows can always be chosen.
    DenseMatrix W(std::max(block.rows, vv), vv);
    std::vector<long long> id(W.rows, -1);
    for (std::size_t r = 0; r < block.rows; ++r) {
        for (std::size_t j = 0; j < vv; ++j) W(r, j) = block(r, j);
        id[r] = ids[r];
    }

    Selection sel;
    std::vector<char> taken(W.rows, 0);
    for (std::size_t k = 0; k < vv; ++k) {
        std::size_t best = W.rows;
        for (std::size_t r = 0; r < W.rows; ++r) {
            if (taken[r]) continue;
            if (best == W.rows || better(W(r, k), id[r], W(best, k), id[best])) best = r;
        }
        taken[best] = 1;
        sel.chosen.push_back(best);
        const double piv = W(best, k);
        if (piv == 0.0 || id[best] < 0) {
            sel.deficient = true;
            continue;
        }
        for (std::size_t r = 0; r < W.rows; ++r) {
            if (taken[r]) continue;
            const double l = W(r, k) / piv;
            W(r, k) = l;
            for (std::size_t j = k + 1; j < vv; ++j) W(r, j) -= l * W(best, j);
        }
    }

    // Row chosen at step i carries its multipliers in columns < i and its
    // row of U from column i on: the packed factorization in pivot order.
    sel.lu = DenseMatrix(vv, vv);
    for (std::size_t i = 0; i < vv; ++i)
        for (std::size_t j = 0; j < vv; ++j) sel.lu(i, j) = W(sel.chosen[i], j);
    return sel;
}

TournamentResult tournament_pivot(sim::RankCtx& ctx, const std::vector<int>& group,
                                  const DenseMatrix& rows, const std::vector<long long>& ids, int v,
                                  int tag, const std::string& block_phase,
                                  const std::string& index_phase) {
    const std::size_t vv = static_cast<std::size_t>(v);
    std::size_t me = group.size();
    for (std::size_t i = 0; i < group.size(); ++i)
        if (group[i] == ctx.rank()) me = i;
    if (me == group.size()) throw DomainError("tournament: rank is not a group member");
    if ((group.size() & (group.size() - 1)) != 0)
        throw DomainError("tournament: group size must be a power of two");

    // Local round: candidate rows keep their original values.
    auto pick = [&](const DenseMatrix& block, const std::vector<long long>& bid,
                    DenseMatrix& cand, std::vector<long long>& cid) {
        Selection s = select_pivots(block, bid, v);
        cand = DenseMatrix(vv, vv);
        cid.assign(vv, -1);
        for (std::size_t i = 0; i < vv; ++i) {
            const std::size_t r = s.chosen[i];
            if (r < block.rows) {
                for (std::size_t j = 0; j < vv; ++j) cand(i, j) = block(r, j);
                cid[i] = bid[r];
            }
        }
        return s;
    };

    TournamentResult out;
    DenseMatrix cand;
    std::vector<long long> cid;
    Selection last = pick(rows, ids, cand, cid);

    for (std::size_t bit = 1; bit < group.size(); bit <<= 1) {
        const std::size_t partner = me ^ bit;
        const int peer = group[partner];
        ctx.set_phase(block_phase);
        ctx.send(peer, to_payload(cand), tag);
        ctx.set_phase(index_phase);
        ctx.send(peer, sim::Payload(cid.begin(), cid.end()), tag + 1);
        ctx.set_phase(block_phase);
        DenseMatrix other =
            from_payload(ctx.recv(peer, tag, static_cast<long long>(vv * vv)), vv, vv);
        ctx.set_phase(index_phase);
        sim::Payload oid = ctx.recv(peer, tag + 1, static_cast<long long>(vv));
        ctx.set_phase(block_phase);

        DenseMatrix stacked(2 * vv, vv);
        std::vector<long long> sid(2 * vv);
        const DenseMatrix& top = me < partner ? cand : other;
        const DenseMatrix& bottom = me < partner ? other : cand;
        for (std::size_t i = 0; i < vv; ++i) {
            for (std::size_t j = 0; j < vv; ++j) {
                stacked(i, j) = top(i, j);
                stacked(vv + i, j) = bottom(i, j);
            }
            const long long mine = cid[i];
            const long long theirs = static_cast<long long>(oid[i]);
            sid[i] = me < partner ? mine : theirs;
            sid[vv + i] = me < partner ? theirs : mine;
        }
        DenseMatrix next;
        std::vector<long long> nid;
        last = pick(stacked, sid, next, nid);
        cand = std::move(next);
        cid = std::move(nid);
        ++out.rounds;
    }

    bool padded = false;
    for (long long x : cid) padded = padded || x < 0;
    if (last.deficient || padded) throw DomainError("rank-deficient step");
    out.pivots = cid;
    out.A00 = last.lu;
    return out;
}

}  // namespace confluxlab::factor
