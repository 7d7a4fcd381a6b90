#pragma once

#include <stdexcept>
#include <string>

namespace psst {

/// Bad input data or a violated contract; maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem trouble; maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Endpoint/transport failure, including replay cache misses; exit code 2.
class GatewayError : public std::runtime_error {
public:
    explicit GatewayError(const std::string& what) : std::runtime_error(what) {}
};

class CacheMissError : public GatewayError {
public:
    explicit CacheMissError(const std::string& key)
        : GatewayError("cache miss: " + key), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// A model reply that failed structural validation; carries the raw reply.
class ReplyParseError : public std::runtime_error {
public:
    ReplyParseError(const std::string& what, std::string raw_reply)
        : std::runtime_error(what), raw_reply_(std::move(raw_reply)) {}
    const std::string& raw_reply() const { return raw_reply_; }

private:
    std::string raw_reply_;
};

}  // namespace psst
