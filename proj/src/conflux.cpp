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
#include <algorithm>
#include <cmath>

#include "confluxlab/error.hpp"
#include "confluxlab/factor.hpp"

namespace confluxlab::factor {

namespace {

using sim::Payload;
using Ids = std::vector<long long>;

int tag_of(int t, int step) { return (t * 16 + step) * 2; }

DenseMatrix extract(const DenseMatrix& layer, const BlockCyclicLayout& lay, const Ids& rows,
                    const Ids& cols) {
    DenseMatrix out(rows.size(), cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const std::size_t lr = lay.local_row(rows[a]);
        for (std::size_t b = 0; b < cols.size(); ++b) out(a, b) = layer(lr, lay.local_col(cols[b]));
    }
    return out;
}

void store(DenseMatrix& layer, const BlockCyclicLayout& lay, const Ids& rows, const Ids& cols,
           const DenseMatrix& src) {
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const std::size_t lr = lay.local_row(rows[a]);
        for (std::size_t b = 0; b < cols.size(); ++b) layer(lr, lay.local_col(cols[b])) = src(a, b);
    }
}

Ids range(long long lo, long long hi) {
    Ids out;
    for (long long x = lo; x < hi; ++x) out.push_back(x);
    return out;
}

DenseMatrix as_matrix(Payload p, std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    m.data = std::move(p);
    return m;
}

DenseMatrix columns(const DenseMatrix& m, std::size_t lo, std::size_t hi) {
    DenseMatrix out(m.rows, hi - lo);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = lo; j < hi; ++j) out(i, j - lo) = m(i, j);
    return out;
}

DenseMatrix rows_of(const DenseMatrix& m, std::size_t lo, std::size_t hi) {
    DenseMatrix out(hi - lo, m.cols);
    std::copy(m.data.begin() + static_cast<std::ptrdiff_t>(lo * m.cols),
              m.data.begin() + static_cast<std::ptrdiff_t>(hi * m.cols), out.data.begin());
    return out;
}

DenseMatrix unit_lower(const DenseMatrix& lu) {
    DenseMatrix L = DenseMatrix::identity(lu.rows);
    for (std::size_t i = 0; i < lu.rows; ++i)
        for (std::size_t j = 0; j < i; ++j) L(i, j) = lu(i, j);
    return L;
}

DenseMatrix upper(const DenseMatrix& lu) {
    DenseMatrix U(lu.rows, lu.cols);
    for (std::size_t i = 0; i < lu.rows; ++i)
        for (std::size_t j = i; j < lu.cols; ++j) U(i, j) = lu(i, j);
    return U;
}

// Index range of chunk i when n items are split over m parts.
std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t m, std::size_t i) {
    return {i * n / m, (i + 1) * n / m};
}

std::size_t index_of(const std::vector<int>& group, int rank) {
    return static_cast<std::size_t>(std::find(group.begin(), group.end(), rank) - group.begin());
}

struct StepPiece {
    Ids l_rows;
    DenseMatrix L10;
    Ids u_cols;
    DenseMatrix U01;
};

struct RankOut {
    std::vector<StepPiece> steps;
    std::vector<Ids> pivots;
    std::vector<DenseMatrix> diag;  // packed A00 (LU) or L00 (Cholesky)
};

struct Setup {
    BlockCyclicLayout lay;
    Ids my_rows;
    Ids my_cols;
    DenseMatrix layer;
};

Setup setup_rank(const sim::RankCtx& ctx, const BlockCyclicLayout& lay, const DenseMatrix& A) {
    const auto [pi, pj, pk] = ctx.coords();
    Setup s{lay, {}, {}, DenseMatrix(lay.local_rows(), lay.local_cols())};
    for (long long r = 0; r < lay.N; ++r) {
        if (lay.row_owner(r) == pi) s.my_rows.push_back(r);
        if (lay.col_owner(r) == pj) s.my_cols.push_back(r);
    }
    if (pk == 0) s.layer = extract(A, BlockCyclicLayout{sim::GridSpec{}, lay.N, lay.v}, s.my_rows,
                                   s.my_cols);
    return s;
}

// Steps 8 and 10: every member of `group` holds a chunk (rows of L10 or
// columns of U01) and sends each other member the part of it lying in that
// member's layer slice. Returns the assembled slice for this rank.
DenseMatrix exchange_l10(sim::RankCtx& ctx, const BlockCyclicLayout& lay,
                         const std::vector<int>& group, std::size_t n, const DenseMatrix& mine,
                         int tag) {
    const std::size_t me = index_of(group, ctx.rank());
    const auto& g = lay.grid;
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (i == me || mine.rows == 0) continue;
        const auto [lo, hi] = lay.slice(g.coords(group[i])[2]);
        ctx.send(group[i], columns(mine, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)).data,
                 tag);
    }
    const auto [lo, hi] = lay.slice(ctx.coords()[2]);
    const std::size_t w = static_cast<std::size_t>(hi - lo);
    DenseMatrix out(n, w);
    for (std::size_t i = 0; i < group.size(); ++i) {
        const auto [a, b] = chunk(n, group.size(), i);
        if (a == b) continue;
        DenseMatrix part =
            i == me ? columns(mine, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi))
                    : as_matrix(ctx.recv(group[i], tag, static_cast<long long>((b - a) * w)),
                                b - a, w);
        for (std::size_t r = a; r < b; ++r)
            for (std::size_t j = 0; j < w; ++j) out(r, j) = part(r - a, j);
    }
    return out;
}

DenseMatrix exchange_u01(sim::RankCtx& ctx, const BlockCyclicLayout& lay,
                         const std::vector<int>& group, std::size_t n, const DenseMatrix& mine,
                         int tag) {
    const std::size_t me = index_of(group, ctx.rank());
    const auto& g = lay.grid;
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (i == me || mine.cols == 0) continue;
        const auto [lo, hi] = lay.slice(g.coords(group[i])[2]);
        ctx.send(group[i], rows_of(mine, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)).data,
                 tag);
    }
    const auto [lo, hi] = lay.slice(ctx.coords()[2]);
    const std::size_t w = static_cast<std::size_t>(hi - lo);
    DenseMatrix out(w, n);
    for (std::size_t i = 0; i < group.size(); ++i) {
        const auto [a, b] = chunk(n, group.size(), i);
        if (a == b) continue;
        DenseMatrix part =
            i == me ? rows_of(mine, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi))
                    : as_matrix(ctx.recv(group[i], tag, static_cast<long long>((b - a) * w)), w,
                                b - a);
        for (std::size_t r = 0; r < w; ++r)
            for (std::size_t j = a; j < b; ++j) out(r, j) = part(r, j - a);
    }
    return out;
}

RankOut lu_rank(sim::RankCtx& ctx, const BlockCyclicLayout& lay, const DenseMatrix& A) {
    const auto& g = lay.grid;
    const auto [pi, pj, pk] = ctx.coords();
    const int v = lay.v;
    const std::size_t vv = static_cast<std::size_t>(v);
    Setup s = setup_rank(ctx, lay, A);
    std::vector<char> masked(static_cast<std::size_t>(lay.N), 0);
    RankOut out;

    for (int t = 0; t < lay.tiles(); ++t) {
        const int t1 = t + 1;
        const long long c0 = static_cast<long long>(t) * v;
        const long long c1 = c0 + v;
        const int pjt = t % g.Py;
        const int pkt = t % g.c();
        const Ids panel_cols = range(c0, c1);

        Ids act;
        for (long long r : s.my_rows)
            if (!masked[static_cast<std::size_t>(r)]) act.push_back(r);
        Ids tcols;
        for (long long c : s.my_cols)
            if (c >= c1) tcols.push_back(c);

        // Step 1: reduce the active part of block column t onto layer pkt.
        DenseMatrix panel;
        if (pj == pjt) {
            ctx.set_phase(phase_name(t1, 1));
            Payload buf = extract(s.layer, lay, act, panel_cols).data;
            ctx.reduce(g.rank_of(pi, pjt, pkt), sim::group_of(g, pi, pjt, -1), buf, tag_of(t, 1));
            if (pk == pkt) panel = as_matrix(std::move(buf), act.size(), vv);
        }

        // Step 2: tournament among the ranks holding the reduced panel.
        const std::vector<int> tgroup = sim::group_of(g, -1, pjt, pkt);
        const bool in_tournament = pj == pjt && pk == pkt;
        Ids piv;
        DenseMatrix A00;
        if (in_tournament) {
            ctx.set_phase(phase_name(t1, 2));
            TournamentResult tr = tournament_pivot(ctx, tgroup, panel, act, v, tag_of(t, 2),
                                                   phase_name(t1, 2), index_phase_name(t1));
            piv = std::move(tr.pivots);
            A00 = std::move(tr.A00);
        }

        // Step 3: A00 and the pivot indices go to every other rank.
        ctx.set_phase(phase_name(t1, 3));
        const int root3 = g.rank_of(0, pjt, pkt);
        if (ctx.rank() == root3) {
            Payload msg = A00.data;
            msg.insert(msg.end(), piv.begin(), piv.end());
            for (int r = 0; r < g.P(); ++r)
                if (std::find(tgroup.begin(), tgroup.end(), r) == tgroup.end())
                    ctx.send(r, msg, tag_of(t, 3));
        } else if (!in_tournament) {
            Payload msg = ctx.recv(root3, tag_of(t, 3), static_cast<long long>(vv * vv + vv));
            A00 = DenseMatrix(vv, vv);
            std::copy(msg.begin(), msg.begin() + static_cast<std::ptrdiff_t>(vv * vv),
                      A00.data.begin());
            for (std::size_t i = 0; i < vv; ++i)
                piv.push_back(static_cast<long long>(msg[vv * vv + i]));
        }
        for (long long p : piv) masked[static_cast<std::size_t>(p)] = 1;
        const DenseMatrix L00 = unit_lower(A00);
        const DenseMatrix U00 = upper(A00);

        Ids np;  // active rows of pi that were not chosen
        std::vector<std::size_t> np_pos;
        for (std::size_t a = 0; a < act.size(); ++a) {
            if (masked[static_cast<std::size_t>(act[a])]) continue;
            np.push_back(act[a]);
            np_pos.push_back(a);
        }

        // Step 4: scatter A10 over (pi, *, *).
        ctx.set_phase(phase_name(t1, 4));
        const std::vector<int> g4 = sim::group_of(g, pi, -1, -1);
        const std::size_t me4 = index_of(g4, ctx.rank());
        const int root4 = g.rank_of(pi, pjt, pkt);
        std::vector<Payload> pieces4;
        if (ctx.rank() == root4) {
            for (std::size_t i = 0; i < g4.size(); ++i) {
                const auto [a, b] = chunk(np.size(), g4.size(), i);
                Payload p;
                for (std::size_t r = a; r < b; ++r)
                    for (std::size_t j = 0; j < vv; ++j) p.push_back(panel(np_pos[r], j));
                pieces4.push_back(std::move(p));
            }
        }
        const auto [l_lo, l_hi] = chunk(np.size(), g4.size(), me4);
        DenseMatrix A10c = as_matrix(ctx.scatter(root4, g4, pieces4, tag_of(t, 4)), l_hi - l_lo, vv);

        // Step 7: L10 = A10 U00^-1.
        ctx.set_phase(phase_name(t1, 7));
        DenseMatrix L10c = trsm(U00, A10c, Side::Right, Uplo::Upper, false);

        // Step 5: reduce the pivot rows of the trailing columns onto layer pkt.
        ctx.set_phase(phase_name(t1, 5));
        Ids mine_piv;
        for (long long p : piv)
            if (lay.row_owner(p) == pi) mine_piv.push_back(p);
        DenseMatrix prow;
        if (!mine_piv.empty() && !tcols.empty()) {
            Payload buf = extract(s.layer, lay, mine_piv, tcols).data;
            ctx.reduce(g.rank_of(pi, pj, pkt), sim::group_of(g, pi, pj, -1), buf, tag_of(t, 5));
            if (pk == pkt) prow = as_matrix(std::move(buf), mine_piv.size(), tcols.size());
        }

        // Step 6: every holder of pivot rows scatters column chunks over (*, pj, *).
        ctx.set_phase(phase_name(t1, 6));
        const std::vector<int> g6 = sim::group_of(g, -1, pj, -1);
        const std::size_t me6 = index_of(g6, ctx.rank());
        const auto [u_lo, u_hi] = chunk(tcols.size(), g6.size(), me6);
        DenseMatrix A01c(vv, u_hi - u_lo);
        if (!tcols.empty()) {
            for (int src = 0; src < g.Px; ++src) {
                std::vector<std::size_t> where;
                for (std::size_t i = 0; i < vv; ++i)
                    if (lay.row_owner(piv[i]) == src) where.push_back(i);
                if (where.empty()) continue;
                const int root6 = g.rank_of(src, pj, pkt);
                std::vector<Payload> pieces6;
                if (ctx.rank() == root6) {
                    for (std::size_t i = 0; i < g6.size(); ++i) {
                        const auto [a, b] = chunk(tcols.size(), g6.size(), i);
                        pieces6.push_back(columns(prow, a, b).data);
                    }
                }
                DenseMatrix got = as_matrix(ctx.scatter(root6, g6, pieces6, tag_of(t, 6)),
                                            where.size(), u_hi - u_lo);
                for (std::size_t q = 0; q < where.size(); ++q)
                    for (std::size_t j = 0; j < got.cols; ++j) A01c(where[q], j) = got(q, j);
            }
        }

        // Step 9: U01 = L00^-1 A01.
        ctx.set_phase(phase_name(t1, 9));
        DenseMatrix U01c = trsm(L00, A01c, Side::Left, Uplo::Lower, true);

        // Steps 8 and 10: replicate the layer slices of L10 and U01.
        ctx.set_phase(phase_name(t1, 8));
        DenseMatrix L10s = exchange_l10(ctx, lay, g4, np.size(), L10c, tag_of(t, 8));
        ctx.set_phase(phase_name(t1, 10));
        DenseMatrix U01s = exchange_u01(ctx, lay, g6, tcols.size(), U01c, tag_of(t, 10));

        // Step 11: this layer's share of the Schur complement.
        ctx.set_phase(phase_name(t1, 11));
        if (!np.empty() && !tcols.empty()) {
            DenseMatrix C = extract(s.layer, lay, np, tcols);
            gemm(L10s, U01s, C, -1.0, 1.0);
            store(s.layer, lay, np, tcols, C);
        }
        ctx.note_resident(static_cast<long long>(s.layer.data.size() + L10s.data.size() +
                                                 U01s.data.size() + panel.data.size() +
                                                 prow.data.size()));

        StepPiece piece;
        piece.l_rows.assign(np.begin() + static_cast<std::ptrdiff_t>(l_lo),
                            np.begin() + static_cast<std::ptrdiff_t>(l_hi));
        piece.L10 = std::move(L10c);
        piece.u_cols.assign(tcols.begin() + static_cast<std::ptrdiff_t>(u_lo),
                            tcols.begin() + static_cast<std::ptrdiff_t>(u_hi));
        piece.U01 = std::move(U01c);
        out.steps.push_back(std::move(piece));
        if (ctx.rank() == 0) {
            out.pivots.push_back(piv);
            out.diag.push_back(A00);
        }
    }
    return out;
}

RankOut chol_rank(sim::RankCtx& ctx, const BlockCyclicLayout& lay, const DenseMatrix& A) {
    const auto& g = lay.grid;
    const auto [pi, pj, pk] = ctx.coords();
    const int v = lay.v;
    const std::size_t vv = static_cast<std::size_t>(v);
    Setup s = setup_rank(ctx, lay, A);
    RankOut out;

    for (int t = 0; t < lay.tiles(); ++t) {
        const int t1 = t + 1;
        const long long c0 = static_cast<long long>(t) * v;
        const long long c1 = c0 + v;
        const int pjt = t % g.Py;
        const int pkt = t % g.c();
        const int dpi = lay.row_owner(c0);
        const Ids panel_cols = range(c0, c1);

        Ids act;
        for (long long r : s.my_rows)
            if (r >= c0) act.push_back(r);
        Ids np;
        for (long long r : act)
            if (r >= c1) np.push_back(r);
        const std::size_t skip = act.size() - np.size();
        Ids tcols;
        for (long long c : s.my_cols)
            if (c >= c1) tcols.push_back(c);

        // Step 1
        DenseMatrix panel;
        if (pj == pjt) {
            ctx.set_phase(phase_name(t1, 1));
            Payload buf = extract(s.layer, lay, act, panel_cols).data;
            ctx.reduce(g.rank_of(pi, pjt, pkt), sim::group_of(g, pi, pjt, -1), buf, tag_of(t, 1));
            if (pk == pkt) panel = as_matrix(std::move(buf), act.size(), vv);
        }

        // Step 2: the diagonal tile is factored where it was reduced.
        ctx.set_phase(phase_name(t1, 2));
        const int droot = g.rank_of(dpi, pjt, pkt);
        DenseMatrix L00;
        if (ctx.rank() == droot) {
            DenseMatrix tile = rows_of(panel, 0, vv);
            try {
                L00 = potrf_seq(tile);
            } catch (const DomainError&) {
                throw DomainError("matrix is not symmetric positive definite (block column " +
                                  std::to_string(t) + ")");
            }
        }

        // Step 3
        ctx.set_phase(phase_name(t1, 3));
        if (ctx.rank() == droot) {
            for (int r = 0; r < g.P(); ++r)
                if (r != droot) ctx.send(r, L00.data, tag_of(t, 3));
        } else {
            L00 = as_matrix(ctx.recv(droot, tag_of(t, 3), static_cast<long long>(vv * vv)), vv, vv);
        }
        const DenseMatrix L00T = L00.transpose();

        // Step 4
        ctx.set_phase(phase_name(t1, 4));
        const std::vector<int> g4 = sim::group_of(g, pi, -1, -1);
        const std::size_t me4 = index_of(g4, ctx.rank());
        const int root4 = g.rank_of(pi, pjt, pkt);
        std::vector<Payload> pieces4;
        if (ctx.rank() == root4) {
            for (std::size_t i = 0; i < g4.size(); ++i) {
                const auto [a, b] = chunk(np.size(), g4.size(), i);
                pieces4.push_back(rows_of(panel, skip + a, skip + b).data);
            }
        }
        const auto [l_lo, l_hi] = chunk(np.size(), g4.size(), me4);
        DenseMatrix A10c = as_matrix(ctx.scatter(root4, g4, pieces4, tag_of(t, 4)), l_hi - l_lo, vv);

        // Step 7: L10 = A10 L00^-T.
        ctx.set_phase(phase_name(t1, 7));
        DenseMatrix L10c = trsm(L00T, A10c, Side::Right, Uplo::Upper, false);

        // Step 5 moves nothing: the pivot rows are the diagonal tile.
        ctx.set_phase(phase_name(t1, 5));

        // Step 6: A10 rows of row-tile class q become the A01 columns of (*, q, *).
        ctx.set_phase(phase_name(t1, 6));
        const std::vector<int> g6 = sim::group_of(g, -1, pj, -1);
        const std::size_t me6 = index_of(g6, ctx.rank());
        if (pj == pjt && pk == pkt) {
            const std::vector<int> dest = sim::group_of(g, -1, pi, -1);
            for (std::size_t i = 0; i < dest.size(); ++i) {
                if (dest[i] == ctx.rank()) continue;
                const auto [a, b] = chunk(np.size(), dest.size(), i);
                if (a == b) continue;
                ctx.send(dest[i], rows_of(panel, skip + a, skip + b).transpose().data, tag_of(t, 6));
            }
        }
        const auto [u_lo, u_hi] = chunk(tcols.size(), g6.size(), me6);
        DenseMatrix A01c(vv, u_hi - u_lo);
        const int src6 = g.rank_of(pj, pjt, pkt);
        if (u_hi > u_lo) {
            if (src6 == ctx.rank()) {
                A01c = rows_of(panel, skip + u_lo, skip + u_hi).transpose();
            } else {
                A01c = as_matrix(
                    ctx.recv(src6, tag_of(t, 6), static_cast<long long>(vv * (u_hi - u_lo))), vv,
                    u_hi - u_lo);
            }
        }

        // Step 9: U01 = L00^-1 A01, the transpose of L10.
        ctx.set_phase(phase_name(t1, 9));
        DenseMatrix U01c = trsm(L00, A01c, Side::Left, Uplo::Lower, false);

        // Steps 8 and 10
        ctx.set_phase(phase_name(t1, 8));
        DenseMatrix L10s = exchange_l10(ctx, lay, g4, np.size(), L10c, tag_of(t, 8));
        ctx.set_phase(phase_name(t1, 10));
        DenseMatrix U01s = exchange_u01(ctx, lay, g6, tcols.size(), U01c, tag_of(t, 10));

        // Step 11: lower-triangle-only update.
        ctx.set_phase(phase_name(t1, 11));
        if (!np.empty() && !tcols.empty()) {
            DenseMatrix C = extract(s.layer, lay, np, tcols);
            gemmt_block(L10s, U01s, C, -1.0, np, tcols);
            store(s.layer, lay, np, tcols, C);
        }
        ctx.note_resident(static_cast<long long>(s.layer.data.size() + L10s.data.size() +
                                                 U01s.data.size() + panel.data.size()));

        StepPiece piece;
        piece.l_rows.assign(np.begin() + static_cast<std::ptrdiff_t>(l_lo),
                            np.begin() + static_cast<std::ptrdiff_t>(l_hi));
        piece.L10 = std::move(L10c);
        out.steps.push_back(std::move(piece));
        if (ctx.rank() == 0) out.diag.push_back(L00);
    }
    return out;
}

void check_square(const DenseMatrix& A) {
    if (A.rows != A.cols) throw DomainError("matrix must be square");
    for (double x : A.data)
        if (!std::isfinite(x)) throw DomainError("matrix has a non-finite entry");
}

}  // namespace

FactorResult conflux(const DenseMatrix& A, const sim::GridSpec& grid, int v, double M,
                     const FactorOptions& opts) {
    check_square(A);
    BlockCyclicLayout lay{grid, static_cast<int>(A.rows), v};
    lay.validate();
    const std::size_t n = A.rows;
    const std::size_t vv = static_cast<std::size_t>(v);

    auto run = sim::spawn<RankOut>(
        grid, M, [&](sim::RankCtx& ctx) { return lu_rank(ctx, lay, A); }, opts.sim);

    FactorResult res;
    res.N = lay.N;
    res.v = v;
    res.M = M;
    res.grid = grid;
    res.stats = std::move(run.stats);
    res.warnings = std::move(run.warnings);

    const RankOut& head = run.results.front();
    res.pivots.steps = head.pivots;
    for (const auto& st : head.pivots) res.pivots.perm.insert(res.pivots.perm.end(), st.begin(), st.end());
    res.pivots.mask.assign(n, 0);
    for (long long p : res.pivots.perm) res.pivots.mask[static_cast<std::size_t>(p)] = 1;
    if (!res.pivots.is_bijection()) throw DomainError("pivot record is not a permutation");
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[static_cast<std::size_t>(res.pivots.perm[i])] = i;

    res.L = DenseMatrix(n, n);
    res.U = DenseMatrix(n, n);
    for (std::size_t t = 0; t < head.pivots.size(); ++t) {
        const std::size_t c0 = t * vv;
        const DenseMatrix& a00 = head.diag[t];
        for (std::size_t i = 0; i < vv; ++i) {
            const std::size_t row = pos[static_cast<std::size_t>(head.pivots[t][i])];
            for (std::size_t j = 0; j < i; ++j) res.L(row, c0 + j) = a00(i, j);
            res.L(row, c0 + i) = 1.0;
            for (std::size_t j = i; j < vv; ++j) res.U(c0 + i, c0 + j) = a00(i, j);
        }
        for (const RankOut& r : run.results) {
            const StepPiece& sp = r.steps[t];
            for (std::size_t a = 0; a < sp.l_rows.size(); ++a)
                for (std::size_t j = 0; j < vv; ++j)
                    res.L(pos[static_cast<std::size_t>(sp.l_rows[a])], c0 + j) = sp.L10(a, j);
            for (std::size_t b = 0; b < sp.u_cols.size(); ++b)
                for (std::size_t i = 0; i < vv; ++i)
                    res.U(c0 + i, static_cast<std::size_t>(sp.u_cols[b])) = sp.U01(i, b);
        }
    }
    const double na = frobenius_norm(A);
    const double diff = frobenius_norm(subtract(A.select_rows(res.pivots.perm), matmul(res.L, res.U)));
    res.residual = na > 0.0 ? diff / na : diff;
    return res;
}

FactorResult confchox(const DenseMatrix& A, const sim::GridSpec& grid, int v, double M,
                      const FactorOptions& opts) {
    check_square(A);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (A(i, j) != A(j, i))
                throw DomainError("matrix is not symmetric (entry " + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
    BlockCyclicLayout lay{grid, static_cast<int>(A.rows), v};
    lay.validate();
    const std::size_t n = A.rows;
    const std::size_t vv = static_cast<std::size_t>(v);

    auto run = sim::spawn<RankOut>(
        grid, M, [&](sim::RankCtx& ctx) { return chol_rank(ctx, lay, A); }, opts.sim);

    FactorResult res;
    res.N = lay.N;
    res.v = v;
    res.M = M;
    res.grid = grid;
    res.stats = std::move(run.stats);
    res.warnings = std::move(run.warnings);
    for (std::size_t i = 0; i < n; ++i) res.pivots.perm.push_back(static_cast<long long>(i));
    res.pivots.mask.assign(n, 1);

    const RankOut& head = run.results.front();
    res.L = DenseMatrix(n, n);
    for (std::size_t t = 0; t < head.diag.size(); ++t) {
        const std::size_t c0 = t * vv;
        res.pivots.steps.push_back(range(static_cast<long long>(c0), static_cast<long long>(c0 + vv)));
        for (std::size_t i = 0; i < vv; ++i)
            for (std::size_t j = 0; j <= i; ++j) res.L(c0 + i, c0 + j) = head.diag[t](i, j);
        for (const RankOut& r : run.results) {
            const StepPiece& sp = r.steps[t];
            for (std::size_t a = 0; a < sp.l_rows.size(); ++a)
                for (std::size_t j = 0; j < vv; ++j)
                    res.L(static_cast<std::size_t>(sp.l_rows[a]), c0 + j) = sp.L10(a, j);
        }
    }
    const double na = frobenius_norm(A);
    const double diff = frobenius_norm(subtract(matmul(res.L, res.L.transpose()), A));
    res.residual = na > 0.0 ? diff / na : diff;
    return res;
}

FactorResult conflux_reference(const DenseMatrix& A, int v) {
    check_square(A);
    BlockCyclicLayout lay{sim::GridSpec{}, static_cast<int>(A.rows), v};
    lay.validate();
    const std::size_t n = A.rows;
    const std::size_t vv = static_cast<std::size_t>(v);
    DenseMatrix W = A;
    std::vector<char> masked(n, 0);
    FactorResult res;
    res.N = lay.N;
    res.v = v;
    res.L = DenseMatrix(n, n);
    res.U = DenseMatrix(n, n);
    std::vector<DenseMatrix> diag;
    std::vector<std::pair<Ids, DenseMatrix>> l10;
    std::vector<DenseMatrix> u01;

    for (int t = 0; t < lay.tiles(); ++t) {
        const long long c0 = static_cast<long long>(t) * v;
        const long long c1 = c0 + v;
        Ids act;
        for (std::size_t r = 0; r < n; ++r)
            if (!masked[r]) act.push_back(static_cast<long long>(r));
        const DenseMatrix panel = extract(W, lay, act, range(c0, c1));
        Selection sel = select_pivots(panel, act, v);
        if (sel.deficient) throw DomainError("rank-deficient step");
        Ids piv;
        for (std::size_t i : sel.chosen) {
            if (i >= act.size()) throw DomainError("rank-deficient step");
            piv.push_back(act[i]);
        }
        for (long long p : piv) masked[static_cast<std::size_t>(p)] = 1;
        Ids np;
        for (long long r : act)
            if (!masked[static_cast<std::size_t>(r)]) np.push_back(r);
        const Ids trailing = range(c1, lay.N);
        DenseMatrix L10 = trsm(upper(sel.lu), extract(W, lay, np, range(c0, c1)), Side::Right,
                               Uplo::Upper, false);
        DenseMatrix U01 = trsm(unit_lower(sel.lu), extract(W, lay, piv, trailing), Side::Left,
                               Uplo::Lower, true);
        if (!np.empty() && !trailing.empty()) {
            DenseMatrix C = extract(W, lay, np, trailing);
            gemm(L10, U01, C, -1.0, 1.0);
            store(W, lay, np, trailing, C);
        }
        res.pivots.steps.push_back(piv);
        res.pivots.perm.insert(res.pivots.perm.end(), piv.begin(), piv.end());
        diag.push_back(sel.lu);
        l10.emplace_back(np, std::move(L10));
        u01.push_back(std::move(U01));
    }
    res.pivots.mask.assign(masked.begin(), masked.end());
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[static_cast<std::size_t>(res.pivots.perm[i])] = i;
    for (std::size_t t = 0; t < diag.size(); ++t) {
        const std::size_t c0 = t * vv;
        for (std::size_t i = 0; i < vv; ++i) {
            const std::size_t row = pos[static_cast<std::size_t>(res.pivots.steps[t][i])];
            for (std::size_t j = 0; j < i; ++j) res.L(row, c0 + j) = diag[t](i, j);
            res.L(row, c0 + i) = 1.0;
            for (std::size_t j = i; j < vv; ++j) res.U(c0 + i, c0 + j) = diag[t](i, j);
            for (std::size_t b = 0; b < u01[t].cols; ++b) res.U(c0 + i, c0 + vv + b) = u01[t](i, b);
        }
        const auto& [rows, L10] = l10[t];
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t j = 0; j < vv; ++j) res.L(pos[static_cast<std::size_t>(rows[a])], c0 + j) = L10(a, j);
    }
    const double na = frobenius_norm(A);
    const double diff = frobenius_norm(subtract(A.select_rows(res.pivots.perm), matmul(res.L, res.U)));
    res.residual = na > 0.0 ? diff / na : diff;
    return res;
}

}  // namespace confluxlab::factor
