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
#include "confluxlab/simnet.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "confluxlab/error.hpp"

namespace confluxlab::sim {

void GridSpec::validate() const {
    if (Px < 1 || Py < 1 || Pz < 1)
        throw DomainError("grid extents must be positive, got " + str());
    if (Px != Py) throw DomainError("grid requires Px = Py, got " + str());
}

std::string GridSpec::str() const {
    return "[" + std::to_string(Px) + "," + std::to_string(Py) + "," + std::to_string(Pz) + "]";
}

GridSpec GridSpec::parse(const std::string& text) {
    std::string t;
    for (char ch : text)
        if (ch != '[' && ch != ']' && ch != ' ') t += ch == 'x' ? ',' : ch;
    std::vector<int> parts;
    std::istringstream in(t);
    for (std::string item; std::getline(in, item, ',');) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw ParseError(1, 1, "grid must look like X,Y,Z, got '" + text + "'");
        parts.push_back(v);
    }
    if (parts.size() != 3) throw ParseError(1, 1, "grid must look like X,Y,Z, got '" + text + "'");
    return GridSpec{parts[0], parts[1], parts[2]};
}

long long CommStats::total_sent() const {
    long long s = 0;
    for (const auto& r : ranks) s += r.sent;
    return s;
}

long long CommStats::total_recv() const {
    long long s = 0;
    for (const auto& r : ranks) s += r.recv;
    return s;
}

long long CommStats::max_recv() const {
    long long s = 0;
    for (const auto& r : ranks) s = std::max(s, r.recv);
    return s;
}

long long CommStats::phase_max_recv(const std::string& phase) const {
    auto it = phase_recv.find(phase);
    if (it == phase_recv.end()) return 0;
    return *std::max_element(it->second.begin(), it->second.end());
}

long long CommStats::phase_total_recv(const std::string& phase) const {
    auto it = phase_recv.find(phase);
    if (it == phase_recv.end()) return 0;
    long long s = 0;
    for (long long w : it->second) s += w;
    return s;
}

std::string comm_report_csv(const CommStats& s) {
    std::ostringstream os;
    os << "# schema_version=1\n";
    os << "rank,pi,pj,pk,sent_words,recv_words,msgs,peak_words\n";
    for (std::size_t r = 0; r < s.ranks.size(); ++r) {
        auto c = s.grid.coords(static_cast<int>(r));
        const RankStats& x = s.ranks[r];
        os << r << "," << c[0] << "," << c[1] << "," << c[2] << "," << x.sent << "," << x.recv
           << "," << x.msgs << "," << x.peak << "\n";
    }
    return os.str();
}

std::vector<int> group_of(const GridSpec& g, int pi, int pj, int pk) {
    std::vector<int> out;
    for (int r = 0; r < g.P(); ++r) {
        auto c = g.coords(r);
        if ((pi < 0 || c[0] == pi) && (pj < 0 || c[1] == pj) && (pk < 0 || c[2] == pk))
            out.push_back(r);
    }
    return out;
}

namespace {

struct Aborted {};

struct Message {
    int src;
    int tag;
    Payload data;
};

}  // namespace

class Machine {
public:
    Machine(const GridSpec& g, double M, const SimOptions& o)
        : grid_(g), M_(M), opts_(o), ranks_(static_cast<std::size_t>(g.P())) {
        int cap = o.max_threads;
        if (cap <= 0) {
            if (const char* env = std::getenv("CONFLUXLAB_THREADS")) cap = std::atoi(env);
        }
        slots_ = cap > 0 ? cap : g.P();
        for (auto& r : ranks_) r.phase = "default";
    }

    RunOutput execute(const std::function<void(RankCtx&)>& entry) {
        std::vector<std::thread> threads;
        threads.reserve(ranks_.size());
        for (int r = 0; r < grid_.P(); ++r) {
            threads.emplace_back([this, r, &entry] {
                RankCtx ctx(this, r);
                try {
                    acquire_slot();
                    entry(ctx);
                } catch (const Aborted&) {
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu_);
                    if (!failure_) failure_ = std::current_exception();
                    abort_ = true;
                }
                finish();
            });
        }
        for (auto& t : threads) t.join();
        if (failure_) std::rethrow_exception(failure_);
        if (!deadlock_.empty()) throw DomainError(deadlock_);
        for (std::size_t r = 0; r < ranks_.size(); ++r) {
            if (!ranks_[r].box.empty()) {
                const Message& m = ranks_[r].box.front();
                throw DomainError("unmatched message from rank " + std::to_string(m.src) +
                                  " to rank " + std::to_string(r) + " (tag " +
                                  std::to_string(m.tag) + ", " + std::to_string(m.data.size()) +
                                  " words)");
            }
        }
        RunOutput out;
        out.stats.grid = grid_;
        for (const auto& r : ranks_) out.stats.ranks.push_back(r.stats);
        out.stats.phase_sent = phase_sent_;
        out.stats.phase_recv = phase_recv_;
        for (const auto& r : ranks_)
            if (!r.budget_warning.empty()) out.warnings.push_back(r.budget_warning);
        return out;
    }

    void send(int from, int dst, const Payload& data, int tag) {
        if (dst < 0 || dst >= grid_.P())
            throw DomainError("rank " + std::to_string(from) + " sends to invalid rank " +
                              std::to_string(dst));
        std::lock_guard<std::mutex> lk(mu_);
        if (abort_) throw Aborted{};
        auto& me = ranks_[static_cast<std::size_t>(from)];
        auto n = static_cast<long long>(data.size());
        me.stats.sent += n;
        me.stats.msgs += 1;
        bump(phase_sent_, me.phase, from, n);
        auto& peer = ranks_[static_cast<std::size_t>(dst)];
        peer.box.push_back({from, tag, data});
        if (peer.waiting && peer.wsrc == from && peer.wtag == tag) {
            peer.waiting = false;
            --blocked_;
            cv_.notify_all();
        }
    }

    Payload recv(int me_rank, int src, int tag, long long expected) {
        if (src < 0 || src >= grid_.P())
            throw DomainError("rank " + std::to_string(me_rank) + " receives from invalid rank " +
                              std::to_string(src));
        std::unique_lock<std::mutex> lk(mu_);
        auto& me = ranks_[static_cast<std::size_t>(me_rank)];
        for (;;) {
            if (abort_) throw Aborted{};
            auto it = std::find_if(me.box.begin(), me.box.end(), [&](const Message& m) {
                return m.src == src && m.tag == tag;
            });
            if (it != me.box.end()) {
                Payload data = std::move(it->data);
                me.box.erase(it);
                auto n = static_cast<long long>(data.size());
                if (expected >= 0 && n != expected)
                    throw DomainError("size mismatch: rank " + std::to_string(src) + " sent " +
                                      std::to_string(n) + " words, rank " +
                                      std::to_string(me_rank) + " expected " +
                                      std::to_string(expected));
                me.stats.recv += n;
                bump(phase_recv_, me.phase, me_rank, n);
                return data;
            }
            me.waiting = true;
            me.wsrc = src;
            me.wtag = tag;
            ++blocked_;
            ++slots_;
            cv_.notify_all();
            if (blocked_ + finished_ == grid_.P()) {
                std::ostringstream os;
                os << "deadlock:";
                for (std::size_t r = 0; r < ranks_.size(); ++r)
                    if (ranks_[r].waiting)
                        os << " rank " << r << " waits on (src " << ranks_[r].wsrc << ", tag "
                           << ranks_[r].wtag << ");";
                deadlock_ = os.str();
                abort_ = true;
                cv_.notify_all();
                throw Aborted{};
            }
            cv_.wait(lk, [&] { return !me.waiting || abort_; });
            if (abort_) throw Aborted{};
            cv_.wait(lk, [&] { return slots_ > 0 || abort_; });
            if (abort_) throw Aborted{};
            --slots_;
        }
    }

    void set_phase(int rank, const std::string& phase) {
        std::lock_guard<std::mutex> lk(mu_);
        ranks_[static_cast<std::size_t>(rank)].phase = phase;
    }

    void note_resident(int rank, long long words) {
        std::lock_guard<std::mutex> lk(mu_);
        auto& st = ranks_[static_cast<std::size_t>(rank)].stats;
        st.peak = std::max(st.peak, words);
        if (static_cast<double>(words) > M_ && !st.over_budget) {
            st.over_budget = true;
            std::string msg = "rank " + std::to_string(rank) + " holds " + std::to_string(words) +
                              " words, above M = " + std::to_string(static_cast<long long>(M_));
            if (opts_.hard_memory) throw CapExceeded(msg);
            ranks_[static_cast<std::size_t>(rank)].budget_warning = msg;
        }
    }

    const GridSpec& grid() const { return grid_; }
    double memory() const { return M_; }
    Tree tree() const { return opts_.tree; }

private:
    struct RankState {
        std::deque<Message> box;
        bool waiting = false;
        int wsrc = -1;
        int wtag = 0;
        RankStats stats;
        std::string phase;
        std::string budget_warning;
    };

    void bump(std::map<std::string, std::vector<long long>>& table, const std::string& phase,
              int rank, long long n) {
        auto& row = table[phase];
        if (row.empty()) row.assign(ranks_.size(), 0);
        row[static_cast<std::size_t>(rank)] += n;
    }

    void acquire_slot() {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return slots_ > 0 || abort_; });
        if (abort_) throw Aborted{};
        --slots_;
    }

    void finish() {
        std::lock_guard<std::mutex> lk(mu_);
        ++finished_;
        ++slots_;
        if (blocked_ > 0 && blocked_ + finished_ == grid_.P() && !abort_) {
            std::ostringstream os;
            os << "deadlock:";
            for (std::size_t r = 0; r < ranks_.size(); ++r)
                if (ranks_[r].waiting)
                    os << " rank " << r << " waits on (src " << ranks_[r].wsrc << ", tag "
                       << ranks_[r].wtag << ");";
            deadlock_ = os.str();
            abort_ = true;
        }
        cv_.notify_all();
    }

    GridSpec grid_;
    double M_;
    SimOptions opts_;
    std::vector<RankState> ranks_;
    std::mutex mu_;
    std::condition_variable cv_;
    int blocked_ = 0;
    int finished_ = 0;
    int slots_ = 0;
    bool abort_ = false;
    std::string deadlock_;
    std::exception_ptr failure_;
    std::map<std::string, std::vector<long long>> phase_sent_;
    std::map<std::string, std::vector<long long>> phase_recv_;
};

std::array<int, 3> RankCtx::coords() const { return m_->grid().coords(rank_); }
const GridSpec& RankCtx::grid() const { return m_->grid(); }
double RankCtx::memory() const { return m_->memory(); }

void RankCtx::send(int dst, const Payload& data, int tag) { m_->send(rank_, dst, data, tag); }

Payload RankCtx::recv(int src, int tag, long long expected_words) {
    return m_->recv(rank_, src, tag, expected_words);
}

void RankCtx::set_phase(const std::string& phase) { m_->set_phase(rank_, phase); }
void RankCtx::note_resident(long long words) { m_->note_resident(rank_, words); }

namespace {

std::size_t index_in(const std::vector<int>& group, int rank, const char* what) {
    auto it = std::find(group.begin(), group.end(), rank);
    if (it == group.end())
        throw DomainError(std::string(what) + ": rank " + std::to_string(rank) +
                          " is not a member of the group");
    return static_cast<std::size_t>(it - group.begin());
}

}  // namespace

void RankCtx::broadcast(int root, const std::vector<int>& group, Payload& data, int tag) {
    const std::size_t n = group.size();
    const std::size_t me = index_in(group, rank_, "broadcast");
    const std::size_t rt = index_in(group, root, "broadcast root");
    if (n <= 1) return;
    if (m_->tree() == Tree::Flat) {
        if (rank_ == root) {
            for (int r : group)
                if (r != root) send(r, data, tag);
        } else {
            data = recv(root, tag);
        }
        return;
    }
    const std::size_t rel = (me + n - rt) % n;
    auto member = [&](std::size_t rr) { return group[(rr + rt) % n]; };
    for (std::size_t mask = 1; mask < n; mask <<= 1) {
        if (rel < mask) {
            if (rel + mask < n) send(member(rel + mask), data, tag);
        } else if (rel < 2 * mask) {
            data = recv(member(rel - mask), tag);
        }
    }
}

void RankCtx::reduce(int root, const std::vector<int>& group, Payload& data, int tag) {
    const std::size_t n = group.size();
    const std::size_t me = index_in(group, rank_, "reduce");
    const std::size_t rt = index_in(group, root, "reduce root");
    if (n <= 1) return;
    auto accumulate = [&](int src) {
        Payload in = recv(src, tag, static_cast<long long>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += in[i];
    };
    if (m_->tree() == Tree::Flat) {
        if (rank_ == root) {
            for (int r : group)
                if (r != root) accumulate(r);
        } else {
            send(root, data, tag);
        }
        return;
    }
    const std::size_t rel = (me + n - rt) % n;
    auto member = [&](std::size_t rr) { return group[(rr + rt) % n]; };
    std::size_t top = 1;
    while (top < n) top <<= 1;
    for (std::size_t mask = top >> 1; mask >= 1; mask >>= 1) {
        if (rel < mask) {
            if (rel + mask < n) accumulate(member(rel + mask));
        } else if (rel < 2 * mask) {
            send(member(rel - mask), data, tag);
            return;
        }
        if (mask == 1) break;
    }
}

Payload RankCtx::scatter(int root, const std::vector<int>& group, const std::vector<Payload>& pieces,
                         int tag) {
    const std::size_t me = index_in(group, rank_, "scatter");
    index_in(group, root, "scatter root");
    if (rank_ == root) {
        if (pieces.size() != group.size())
            throw DomainError("scatter root " + std::to_string(root) + " has " +
                              std::to_string(pieces.size()) + " pieces for " +
                              std::to_string(group.size()) + " ranks");
        for (std::size_t i = 0; i < group.size(); ++i)
            if (group[i] != root) send(group[i], pieces[i], tag);
        return pieces[me];
    }
    return recv(root, tag);
}

std::vector<Payload> RankCtx::allgather(const std::vector<int>& group, const Payload& mine, int tag) {
    const std::size_t me = index_in(group, rank_, "allgather");
    for (int r : group)
        if (r != rank_) send(r, mine, tag);
    std::vector<Payload> all(group.size());
    for (std::size_t i = 0; i < group.size(); ++i)
        all[i] = i == me ? mine : recv(group[i], tag);
    return all;
}

RunOutput run(const GridSpec& grid, double M, const std::function<void(RankCtx&)>& entry,
              const SimOptions& opts) {
    grid.validate();
    Machine m(grid, M, opts);
    return m.execute(entry);
}

}  // namespace confluxlab::sim
