#pragma once

#include <stdexcept>
#include <string>

namespace nsqstab {

/// Shape or structure mismatch between operands.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Out-of-range or malformed index selection.
struct index_error : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// A combinatorial enumeration would exceed the configured cap.
struct cap_error : std::length_error {
    using std::length_error::length_error;
};

/// An operation was called outside its stated precondition.
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-convergence, blowup) with a diagnostic.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be opened or written.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries line/column diagnostics in the message.
struct parse_error : std::runtime_error {
    parse_error(const std::string& what, long line, long column)
        : std::runtime_error(what + " (line " + std::to_string(line) +
                             ", column " + std::to_string(column) + ")"),
          line(line),
          column(column) {}

    long line;
    long column;
};

} // namespace nsqstab
