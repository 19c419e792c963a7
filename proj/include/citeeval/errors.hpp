#pragma once

#include <stdexcept>
#include <string>

namespace citeeval {

// Root of every error the toolkit raises. Each stage throws a subclass so
// callers can quarantine an instance on one kind and abort on another.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Two sequences that must be aligned by statement index have different lengths
// or N/A masks.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class DegenerateInstanceError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

// Judge output that does not match the tagged format. `span()` holds the
// offending slice of the transcript.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string span)
        : Error(what), span_(std::move(span)) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    const std::string& span() const noexcept { return span_; }

private:
    std::string span_;
};

class TransportError : public Error {
public:
    TransportError(const std::string& what, bool retriable)
        : Error(what), retriable_(retriable) {}

    bool retriable() const noexcept { return retriable_; }

private:
    bool retriable_;
};

class FixtureMissingError : public Error {
public:
    using Error::Error;
};

class AttributionIncompleteError : public Error {
public:
    using Error::Error;
};

class RatingIncompleteError : public Error {
public:
    using Error::Error;
};

class UnderdeterminedError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class UndefinedCorrelationError : public Error {
public:
    using Error::Error;
};

class EmptyComparisonError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class IngestionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Wraps a stage failure with the id of the instance being processed.
class InstanceError : public Error {
public:
    InstanceError(std::string instance_id, const std::string& kind, const std::string& what)
        : Error(instance_id + ": " + what), instance_id_(std::move(instance_id)), kind_(kind) {}

    const std::string& instance_id() const noexcept { return instance_id_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string instance_id_;
    std::string kind_;
};

}  // namespace citeeval
