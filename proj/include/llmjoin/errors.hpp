#pragma once

#include <stdexcept>
#include <string>

namespace llmjoin {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The token budget cannot fit even one tuple from each table.
class InfeasibleBudget : public Error {
public:
    explicit InfeasibleBudget(const std::string& what) : Error(what) {}
};

/// Batch sizes violate the per-invocation token constraint.
class InfeasibleBatch : public Error {
public:
    explicit InfeasibleBatch(const std::string& what) : Error(what) {}
};

/// Argument outside the domain of a cost formula (e.g. b1*s1 >= t).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

class EmptyTable : public Error {
public:
    explicit EmptyTable(const std::string& what) : Error(what) {}
};

/// Malformed input file (CSV/JSONL/config).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(what) {}
};

/// Request exceeded the per-request timeout after all retries.
class BackendTimeout : public BackendError {
public:
    explicit BackendTimeout(const std::string& what) : BackendError(what) {}
};

/// Provider rejected the request (4xx); the join aborts with a diagnostic.
class BackendRejected : public BackendError {
public:
    explicit BackendRejected(const std::string& what) : BackendError(what) {}
};

/// Replay-mode backend saw a request that is not in the cassette.
class CassetteMiss : public BackendError {
public:
    explicit CassetteMiss(const std::string& what) : BackendError(what) {}
};

/// Adaptive join overflowed even with the selectivity estimate capped at one.
/// Signals an underestimated per-result output size or pathological data.
class NonConvergence : public Error {
public:
    explicit NonConvergence(const std::string& what) : Error(what) {}
};

} // namespace llmjoin
