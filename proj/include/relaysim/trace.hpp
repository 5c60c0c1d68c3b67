#pragma once
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relaysim/types.hpp"

namespace relaysim {

enum class ChainId : std::uint8_t { A = 0, B = 1 };
inline const char* chain_name(ChainId c) { return c == ChainId::A ? "A" : "B"; }
inline ChainId other_chain(ChainId c) { return c == ChainId::A ? ChainId::B : ChainId::A; }

enum class PayloadKind : std::uint8_t {
    Register,
    Withdraw,
    Transfer,
    AssignTasks,
    DeliverTx,
    ProveDelivery,
    SubmitTimeout,
    Plain,
};
const char* payload_name(PayloadKind k);

enum class TaskPhase : std::uint8_t { Requested, Delivered, Acked, TimedOut };
const char* phase_name(TaskPhase p);

// One entry in a mined block: the transaction plus its execution result.
struct TxSummary {
    Hash256 id;
    Address submitter;
    PayloadKind kind{PayloadKind::Plain};
    Tokens gas_price{0};
    Tokens gas_units{0};
    bool reverted{false};
    Err reason{Err::None};
    Hash256 task;  // zero when not task-related
};

struct BlockEvent {
    ChainId chain{ChainId::A};
    Height height{0};
    std::vector<TxSummary> txs;
};

enum class LedgerKind : std::uint8_t {
    Genesis,
    GasPayment,
    EscrowLock,       // principal + fee locked at transfer
    CollateralLock,   // registration deposit
    CollateralReturn, // reclaim payout
    DeliveryMint,     // destination-side mint to the recipient
    FeeRelease,       // fee paid out on acknowledgement
    PrincipalBurn,    // source-side destruction on acknowledgement
    TimeoutRefund,    // principal + fee back to the origin user
    Slash,
    ReporterReward,
    UserSlashShare,
    SlashBurn,
    AllocatorReward,
};
const char* ledger_name(LedgerKind k);

// Balance-affecting event. `deltas` apply to accounts of `chain`; `minted` and
// `burned` adjust that chain's supply. Replaying all ledger events over the
// genesis balances must reproduce the final balances exactly.
struct LedgerEvent {
    LedgerKind kind{LedgerKind::Genesis};
    ChainId chain{ChainId::A};
    std::vector<std::pair<Address, Tokens>> deltas;
    Tokens minted{0};
    Tokens burned{0};
    Tokens escrow_fee_delta{0};
    Tokens escrow_principal_delta{0};
    Tokens collateral_delta{0};
    Hash256 task;
    RelayerId relayer{-1};
};

struct TaskLifecycleEvent {
    Hash256 task;
    TaskPhase phase{TaskPhase::Requested};
    ChainId chain{ChainId::A};  // chain on which the phase change was recorded
    Height height{0};           // block that recorded it
    std::vector<RelayerId> assignees;
    Address deliverer;        // Delivered only
    TimeUs request_submit_time{0};  // Requested only
    Tokens fee{0};
    bool fee_below_profitable{false};
};

// Published assignment, either inline with the transfer (at-creation
// allocation) or via a later assignment transaction (validated allocation).
struct AssignmentEvent {
    Hash256 task;
    std::vector<RelayerId> assignees;
    Height height{0};
    ChainId chain{ChainId::A};
};

struct AgentActionEvent {
    std::string agent;
    PayloadKind kind{PayloadKind::Plain};
    Hash256 task;
    TimeUs submit_time{0};
    ChainId chain{ChainId::A};
};

struct ViolationEvent {
    std::string what;
    ChainId chain{ChainId::A};
    Height height{0};
};

using TraceEventBody = std::variant<BlockEvent, LedgerEvent, TaskLifecycleEvent, AssignmentEvent,
                                    AgentActionEvent, ViolationEvent>;

struct TraceEvent {
    TimeUs at{0};
    std::uint64_t seq{0};
    TraceEventBody body;
};

class TraceLog {
  public:
    void append(TimeUs at, TraceEventBody body) { events_.push_back({at, next_seq_++, std::move(body)}); }
    const std::vector<TraceEvent>& events() const { return events_; }

  private:
    std::vector<TraceEvent> events_;
    std::uint64_t next_seq_{0};
};

struct AgentInfo {
    std::string name;
    Address address;
    std::string strategy;
};

struct TraceMeta {
    std::uint64_t seed{0};
    TimeUs duration{0};
    std::string allocation_mode;
    int coordinated_relayers{0};
    double offered_rate{0.0};  // transfers per second injected
    std::vector<AgentInfo> agents;
    std::map<ChainId, std::map<Address, Tokens>> genesis_balances;
    std::map<ChainId, std::map<Address, Tokens>> final_balances;
    bool conservation_ok{true};
};

struct RunTrace {
    TraceMeta meta;
    std::vector<TraceEvent> events;
};

// Newline-delimited serialization with a stable field order: one meta line
// followed by one line per event. Two identical runs serialize identically.
std::string to_ndjson(const RunTrace& trace);
void write_ndjson(const RunTrace& trace, const std::string& path);
RunTrace trace_from_ndjson(const std::string& text);

// Applies every ledger event to the genesis balances. Matches the recorded
// final balances whenever the trace is complete.
std::map<ChainId, std::map<Address, Tokens>> replay_balances(const RunTrace& trace);

// Equality that treats an absent account and a zero balance as the same.
bool balances_match(const std::map<ChainId, std::map<Address, Tokens>>& x,
                    const std::map<ChainId, std::map<Address, Tokens>>& y);

}  // namespace relaysim
