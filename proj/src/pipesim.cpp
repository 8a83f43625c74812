#include "hetplan/pipesim/pipesim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "hetplan/types.hpp"

namespace hetplan::pipesim {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

microbatch_schedule make_schedule(int global_bz, int eta, int xi) {
    if (global_bz <= 0) fail("schedule: B must be positive");
    if (eta < 1 || eta > xi || xi > global_bz)
        fail(fmt::format("schedule: need 1 <= eta <= xi <= B, got eta={} xi={} B={}",
                         eta, xi, global_bz));
    microbatch_schedule s;
    s.global_bz = global_bz;
    s.eta = eta;
    s.xi = xi;
    const int m = static_cast<int>(ceil_div(global_bz, eta));
    for (int k = 0; k < m; ++k) {
        s.prefill_sizes.push_back(std::min(eta, global_bz - k * eta));
        s.group_of_prefill.push_back(k * eta / xi);
    }
    s.num_groups = static_cast<int>(ceil_div(global_bz, xi));
    // every decode group must own at least one prefill batch, otherwise the
    // group could never become ready (a batch straddling a group boundary is
    // attributed to the group its first request falls in)
    if (s.group_of_prefill.back() != s.num_groups - 1)
        fail(fmt::format(
            "schedule: eta={} xi={} B={} leaves decode group {} without any "
            "prefill batch",
            eta, xi, global_bz, s.num_groups - 1));
    return s;
}

namespace {

// one processing unit flowing through the pipeline
struct unit_ref {
    unit_kind kind = unit_kind::prefill;
    int index = 0;  // prefill batch index / decode group index
    int token = 0;  // 0 for prefill, 1..gen_len-1 for decode

    friend bool operator<(const unit_ref& a, const unit_ref& b) {
        return std::tie(a.kind, a.index, a.token) <
               std::tie(b.kind, b.index, b.token);
    }
};

struct queued_unit {
    double ready = 0.0;
    unit_ref u;

    friend bool operator<(const queued_unit& a, const queued_unit& b) {
        if (a.ready != b.ready) return a.ready < b.ready;
        return a.u < b.u;
    }
};

enum class ev_type { arrival, compute_done };

struct event {
    double time = 0.0;
    ev_type type = ev_type::arrival;
    int stage = 0;
    unit_ref u;

    friend bool operator<(const event& a, const event& b) {
        return std::tie(a.time, a.type, a.stage, a.u) <
               std::tie(b.time, b.type, b.stage, b.u);
    }
};

struct sim_state {
    const std::vector<stage_cost>& stages;
    const microbatch_schedule& sched;
    const int gen_len;
    const bool keep_timeline;
    const int num_stages;

    std::set<event> events;
    std::vector<std::set<queued_unit>> queue;  // per stage, arrived units
    std::vector<double> stage_free;
    std::vector<double> busy;
    std::vector<int> group_pending;  // prefill batches still to finish
    double makespan = 0.0;
    std::int64_t completed = 0;
    sim_report report;

    sim_state(const std::vector<stage_cost>& st, const microbatch_schedule& sc,
              int n, bool tl)
        : stages(st),
          sched(sc),
          gen_len(n),
          keep_timeline(tl),
          num_stages(static_cast<int>(st.size())) {
        queue.resize(num_stages);
        stage_free.assign(num_stages, 0.0);
        busy.assign(num_stages, 0.0);
        group_pending.assign(sched.num_groups, 0);
        for (int g : sched.group_of_prefill) ++group_pending[g];
        for (int k = 0; k < static_cast<int>(sched.prefill_sizes.size()); ++k)
            events.insert({0.0, ev_type::arrival, 0,
                           {unit_kind::prefill, k, 0}});
    }

    double compute_cost(int j, const unit_ref& u) const {
        return u.kind == unit_kind::prefill ? stages[j].pre_s : stages[j].dec_s;
    }

    double comm_cost(int j, const unit_ref& u) const {
        return u.kind == unit_kind::prefill ? stages[j].comm_pre_s
                                            : stages[j].comm_dec_s;
    }

    // transfers serialize per link but overlap with compute
    std::vector<double> link_free = std::vector<double>();

    void exit_last_stage(const unit_ref& u, double t) {
        makespan = std::max(makespan, t);
        ++completed;
        if (u.kind == unit_kind::prefill) {
            const int g = sched.group_of_prefill[u.index];
            if (--group_pending[g] == 0 && gen_len >= 2)
                events.insert(
                    {t, ev_type::arrival, 0, {unit_kind::decode, g, 1}});
        } else if (u.token + 1 <= gen_len - 1) {
            events.insert(
                {t, ev_type::arrival, 0, {unit_kind::decode, u.index, u.token + 1}});
        }
    }

    void apply(const event& ev, std::set<int>& touched) {
        if (ev.type == ev_type::arrival) {
            queue[ev.stage].insert({ev.time, ev.u});
            touched.insert(ev.stage);
            return;
        }
        // compute_done: stage_free was set at dispatch; route the unit onward
        touched.insert(ev.stage);
        if (ev.stage == num_stages - 1) {
            exit_last_stage(ev.u, ev.time);
            return;
        }
        const double c = comm_cost(ev.stage, ev.u);
        const double start = std::max(ev.time, link_free[ev.stage]);
        link_free[ev.stage] = start + c;
        events.insert({start + c, ev_type::arrival, ev.stage + 1, ev.u});
    }

    void try_dispatch(int j, double now) {
        if (queue[j].empty() || stage_free[j] > now) return;
        const queued_unit qu = *queue[j].begin();
        queue[j].erase(queue[j].begin());
        const double cost = compute_cost(j, qu.u);
        const double start = now;  // stage free and unit arrived by `now`
        stage_free[j] = start + cost;
        busy[j] += cost;
        if (keep_timeline)
            report.timeline.push_back(
                {j, qu.u.kind, qu.u.index, qu.u.token, start, start + cost});
        events.insert({start + cost, ev_type::compute_done, j, qu.u});
    }

    void run() {
        link_free.assign(std::max(0, num_stages - 1), 0.0);
        while (!events.empty()) {
            const double t = events.begin()->time;
            std::set<int> touched;
            bool progress = true;
            while (progress) {
                progress = false;
                while (!events.empty() && events.begin()->time == t) {
                    const event ev = *events.begin();
                    events.erase(events.begin());
                    apply(ev, touched);
                    progress = true;
                }
                for (int j : touched) try_dispatch(j, t);
                touched.clear();
            }
        }
    }
};

}  // namespace

sim_report simulate(const std::vector<stage_cost>& stages,
                    const microbatch_schedule& sched, int gen_len,
                    bool keep_timeline) {
    if (stages.empty()) fail("simulate: no stages");
    for (size_t j = 0; j < stages.size(); ++j) {
        const auto& c = stages[j];
        for (double v : {c.pre_s, c.dec_s, c.comm_pre_s, c.comm_dec_s})
            if (!(v >= 0.0) || !std::isfinite(v))
                fail(fmt::format("simulate: stage {} has a negative or "
                                 "non-finite cost",
                                 j));
    }
    if (gen_len < 1) fail("simulate: gen_len must be >= 1");
    // structural consistency with make_schedule
    const microbatch_schedule ref =
        make_schedule(sched.global_bz, sched.eta, sched.xi);
    if (sched.prefill_sizes != ref.prefill_sizes ||
        sched.group_of_prefill != ref.group_of_prefill ||
        sched.num_groups != ref.num_groups)
        fail("simulate: schedule fields are inconsistent with (B, eta, xi)");

    sim_state st(stages, sched, gen_len, keep_timeline);
    st.run();

    const std::int64_t expected =
        static_cast<std::int64_t>(sched.prefill_sizes.size()) +
        static_cast<std::int64_t>(gen_len >= 2 ? sched.num_groups : 0) *
            (gen_len - 1);
    if (st.completed != expected)
        fail(fmt::format("simulate: internal error, {} of {} units completed",
                         st.completed, expected));

    sim_report r = std::move(st.report);
    r.makespan_s = st.makespan;
    r.stage_busy_s = st.busy;
    double total_busy = 0.0;
    for (double b : st.busy) total_busy += b;
    r.bubble_fraction =
        st.makespan > 0.0
            ? 1.0 - total_busy / (static_cast<double>(stages.size()) *
                                  st.makespan)
            : 0.0;
    std::sort(r.timeline.begin(), r.timeline.end(),
              [](const timeline_event& a, const timeline_event& b) {
                  return std::tie(a.start, a.stage, a.kind, a.index, a.token) <
                         std::tie(b.start, b.stage, b.kind, b.index, b.token);
              });
    return r;
}

double analytic_latency(const std::vector<stage_cost>& stages, int global_bz,
                        int eta, int xi, int gen_len) {
    if (stages.empty()) fail("analytic_latency: no stages");
    double max_pre = 0.0, max_dec = 0.0, sum_pre = 0.0, sum_dec = 0.0;
    for (const auto& c : stages) {
        max_pre = std::max({max_pre, c.pre_s, c.comm_pre_s});
        max_dec = std::max({max_dec, c.dec_s, c.comm_dec_s});
        sum_pre += c.pre_s;
        sum_dec += c.dec_s;
    }
    const double k_pre = static_cast<double>(bubble_count(global_bz, eta));
    const double k_dec = static_cast<double>(bubble_count(global_bz, xi)) *
                         (gen_len - 1);
    return k_pre * max_pre + k_dec * max_dec + sum_pre + sum_dec;
}

std::string serialize_report(const sim_report& r, double analytic_s) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["makespan_s"] = r.makespan_s;
    j["analytic_s"] = analytic_s;
    j["gap_s"] = r.makespan_s - analytic_s;
    j["bubble_fraction"] = r.bubble_fraction;
    j["stage_busy_s"] = r.stage_busy_s;
    j["timeline_events"] = r.timeline.size();
    return j.dump(2) + "\n";
}

std::string timeline_csv(const sim_report& r) {
    std::string out = "stage,kind,index,token,start,end\n";
    for (const auto& e : r.timeline)
        out += fmt::format("{},{},{},{},{:.17g},{:.17g}\n", e.stage,
                           e.kind == unit_kind::prefill ? "prefill" : "decode",
                           e.index, e.token, e.start, e.end);
    return out;
}

}  // namespace hetplan::pipesim
