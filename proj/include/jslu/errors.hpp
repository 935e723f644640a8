#ifndef JSLU_ERRORS_HPP
#define JSLU_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jslu {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not conform (always names both shapes).
class dim_error : public error {
public:
    explicit dim_error(const std::string& msg) : error(msg) {}
};

// Malformed corpora, label/mode mismatches, bad external files.
class data_error : public error {
public:
    explicit data_error(const std::string& msg) : error(msg) {}
};

// Invalid configuration values or combinations.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

// Non-finite values where finite ones are required (loss, gradients).
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& msg) : error(msg) {}
};

// Index outside the valid range (labels, positions).
class index_error : public error {
public:
    explicit index_error(const std::string& msg) : error(msg) {}
};

class checkpoint_error : public error {
public:
    enum class kind { corrupt, version_mismatch, shape_mismatch };

    checkpoint_error(kind k, const std::string& msg) : error(msg), kind_(k) {}
    kind which() const { return kind_; }

private:
    kind kind_;
};

// Requested an operation the model configuration does not support.
class unsupported_error : public error {
public:
    explicit unsupported_error(const std::string& msg) : error(msg) {}
};

} // namespace jslu

#endif
