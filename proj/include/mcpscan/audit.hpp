#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcpscan/result.hpp"
#include "mcpscan/taxonomy.hpp"

namespace mcpscan {

/// One tool call as seen by the auditor. Arguments arrive pre-redacted;
/// the auditor never stores payload contents.
struct InvocationEvent {
    std::string session_id;
    std::uint64_t seq = 0; // strictly increasing within a session
    std::string tool_name;
    std::string server_id;
    CapabilitySet caps;
    std::string args_summary;
    std::string ts;

    bool operator==(const InvocationEvent&) const = default;
};

inline void to_json(json& j, const InvocationEvent& e) {
    j = json{{"session", e.session_id}, {"seq", e.seq},
             {"tool", e.tool_name},     {"server_id", e.server_id},
             {"eit", e.caps.eit},       {"pat", e.caps.pat},
             {"nat", e.caps.nat},       {"args", e.args_summary},
             {"ts", e.ts}};
}

inline void from_json(const json& j, InvocationEvent& e) {
    e.session_id = j.value("session", "");
    e.seq = j.at("seq").get<std::uint64_t>();
    e.tool_name = j.value("tool", "");
    e.server_id = j.value("server_id", "");
    e.caps.eit = j.value("eit", false);
    e.caps.pat = j.value("pat", false);
    e.caps.nat = j.value("nat", false);
    e.args_summary = j.value("args", "");
    e.ts = j.value("ts", "");
}

enum class FindingKind { multi_tool_chain, single_tool_chain };

inline const char* finding_kind_label(FindingKind k) {
    return k == FindingKind::single_tool_chain ? "single-tool-chain" : "multi-tool-chain";
}

/// A detected ingestion -> collection -> disclosure subsequence. The
/// witnesses satisfy seq(e) <= seq(p) <= seq(n); a full-chain event may
/// fill several witness slots at once.
struct AuditFinding {
    std::string session_id;
    std::uint64_t e_seq = 0, p_seq = 0, n_seq = 0;
    std::string e_tool, p_tool, n_tool;
    FindingKind kind = FindingKind::multi_tool_chain;
    std::string note;

    bool operator==(const AuditFinding&) const = default;
};

inline void to_json(json& j, const AuditFinding& f) {
    j = json{{"session", f.session_id},
             {"e_seq", f.e_seq},
             {"p_seq", f.p_seq},
             {"n_seq", f.n_seq},
             {"e_tool", f.e_tool},
             {"p_tool", f.p_tool},
             {"n_tool", f.n_tool},
             {"kind", finding_kind_label(f.kind)},
             {"note", f.note}};
}

inline void from_json(const json& j, AuditFinding& f) {
    f.session_id = j.value("session", "");
    f.e_seq = j.value("e_seq", std::uint64_t{0});
    f.p_seq = j.value("p_seq", std::uint64_t{0});
    f.n_seq = j.value("n_seq", std::uint64_t{0});
    f.e_tool = j.value("e_tool", "");
    f.p_tool = j.value("p_tool", "");
    f.n_tool = j.value("n_tool", "");
    f.kind = j.value("kind", "") == "single-tool-chain" ? FindingKind::single_tool_chain
                                                        : FindingKind::multi_tool_chain;
    f.note = j.value("note", "");
}

/// Chains never span sessions. max_window, when set, bounds
/// seq(n) - seq(e) for a chain to count.
struct AuditPolicy {
    bool within_session_only = true; // the only supported mode
    std::optional<std::uint64_t> max_window;
};

namespace detail {

inline AuditFinding make_finding(const std::string& session, const InvocationEvent& e,
                                 const InvocationEvent& p, const InvocationEvent& n) {
    AuditFinding f;
    f.session_id = session;
    f.e_seq = e.seq;
    f.p_seq = p.seq;
    f.n_seq = n.seq;
    f.e_tool = e.tool_name;
    f.p_tool = p.tool_name;
    f.n_tool = n.tool_name;
    f.kind = (e.seq == p.seq && p.seq == n.seq) ? FindingKind::single_tool_chain
                                                : FindingKind::multi_tool_chain;
    f.note = f.kind == FindingKind::single_tool_chain
                 ? "one full-chain tool covers all three stages"
                 : "ordered ingestion->collection->disclosure sequence";
    return f;
}

/// Per-session detector. Unbounded mode keeps O(1) state: the earliest
/// ingestion event and the earliest collection event at-or-after it.
/// Windowed mode keeps the events of the last `window` sequence numbers.
class SessionState {
public:
    explicit SessionState(std::optional<std::uint64_t> window) : window_(window) {}

    /// Returns a finding when this event completes a chain.
    std::optional<AuditFinding> on_event(const InvocationEvent& ev) {
        if (!window_) {
            if (ev.caps.eit && !earliest_e_) earliest_e_ = ev;
            if (ev.caps.pat && earliest_e_ && !earliest_p_ && ev.seq >= earliest_e_->seq)
                earliest_p_ = ev;
            if (ev.caps.nat && earliest_p_)
                return make_finding(ev.session_id, *earliest_e_, *earliest_p_, ev);
            return std::nullopt;
        }
        // Windowed: retain a sliding buffer and re-derive witnesses per
        // disclosure event, matching the batch selection exactly.
        buffer_.push_back(ev);
        while (!buffer_.empty() && ev.seq - buffer_.front().seq > *window_) buffer_.pop_front();
        if (!ev.caps.nat) return std::nullopt;
        const InvocationEvent* e = nullptr;
        for (const auto& cand : buffer_) {
            if (cand.caps.eit && cand.seq <= ev.seq) {
                e = &cand;
                break;
            }
        }
        if (!e) return std::nullopt;
        const InvocationEvent* p = nullptr;
        for (const auto& cand : buffer_) {
            if (cand.caps.pat && cand.seq >= e->seq && cand.seq <= ev.seq) {
                p = &cand;
                break;
            }
        }
        if (!p) return std::nullopt;
        return make_finding(ev.session_id, *e, *p, ev);
    }

private:
    std::optional<std::uint64_t> window_;
    std::optional<InvocationEvent> earliest_e_;
    std::optional<InvocationEvent> earliest_p_;
    std::deque<InvocationEvent> buffer_;
};

} // namespace detail

/// Online auditor: feed events in per-session order; findings come out
/// as the completing disclosure events arrive. Sessions are independent.
class StreamAuditor {
public:
    explicit StreamAuditor(AuditPolicy policy = {}) : policy_(policy) {}

    /// Error on out-of-order or duplicate sequence numbers in a session.
    Result<std::optional<AuditFinding>> push(const InvocationEvent& ev) {
        using R = Result<std::optional<AuditFinding>>;
        auto [it, inserted] = sessions_.try_emplace(ev.session_id, detail::SessionState(policy_.max_window));
        auto& last = last_seq_[ev.session_id];
        if (!inserted && ev.seq <= last)
            return R::failure("out-of-order",
                              "session " + ev.session_id + ": seq " + std::to_string(ev.seq) +
                                  " after " + std::to_string(last));
        last = ev.seq;
        auto finding = it->second.on_event(ev);
        if (finding) findings_.push_back(*finding);
        return R(std::move(finding));
    }

    const std::vector<AuditFinding>& findings() const { return findings_; }

private:
    AuditPolicy policy_;
    std::map<std::string, detail::SessionState> sessions_;
    std::map<std::string, std::uint64_t> last_seq_;
    std::vector<AuditFinding> findings_;
};

/// Batch scan over a full log. Events may arrive unsorted across
/// sessions; within a session duplicate sequence numbers are an error.
/// Findings are ordered by (session, disclosure seq).
inline Result<std::vector<AuditFinding>> scan_log(std::span<const InvocationEvent> events,
                                                  const AuditPolicy& policy = {}) {
    using R = Result<std::vector<AuditFinding>>;
    std::map<std::string, std::vector<const InvocationEvent*>> by_session;
    for (const auto& ev : events) by_session[ev.session_id].push_back(&ev);

    std::vector<AuditFinding> findings;
    for (auto& [session, list] : by_session) {
        std::stable_sort(list.begin(), list.end(),
                         [](const InvocationEvent* a, const InvocationEvent* b) {
                             return a->seq < b->seq;
                         });
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (list[i]->seq == list[i - 1]->seq)
                return R::failure("duplicate-seq", "session " + session + ": duplicate seq " +
                                                       std::to_string(list[i]->seq));
        }
        detail::SessionState state(policy.max_window);
        for (const auto* ev : list) {
            auto finding = state.on_event(*ev);
            if (finding) findings.push_back(*finding);
        }
    }
    return findings;
}

} // namespace mcpscan
