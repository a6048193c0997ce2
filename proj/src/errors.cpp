#include "multexode/errors.hpp"

#include <sstream>
#include <utility>

namespace multexode {

namespace {

std::string format_x(const char* prefix, double x, const std::string& tail) {
    std::ostringstream os;
    os.precision(17);
    os << prefix << x << tail;
    return os.str();
}

std::string syntax_message(std::size_t offset, const std::vector<std::string>& expected,
                           const std::string& found) {
    std::ostringstream os;
    os << "syntax error at offset " << offset << ": found " << found << ", expected one of {";
    for (std::size_t i = 0; i < expected.size(); ++i) {
        os << (i ? ", " : "") << expected[i];
    }
    os << "}";
    return os.str();
}

}  // namespace

DivisorTooSmall::DivisorTooSmall(double x_, std::string what)
    : Error(format_x("divisor too small at x = ", x_, what.empty() ? "" : " (" + what + ")")), x(x_) {}

Overflow::Overflow(double x_, std::string context)
    : Error(format_x("non-finite value at x = ", x_, context.empty() ? "" : " (" + context + ")")), x(x_) {}

SyntaxError::SyntaxError(std::size_t offset_, std::vector<std::string> expected_, std::string found)
    : InputError(syntax_message(offset_, expected_, found)), offset(offset_), expected(std::move(expected_)) {}

UnboundCoefficient::UnboundCoefficient(std::string name_)
    : InputError("unbound coefficient '" + name_ + "'"), name(std::move(name_)) {}

}  // namespace multexode
