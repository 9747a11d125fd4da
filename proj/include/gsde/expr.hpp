#pragma once

#include <memory>
#include <string>

namespace gsde {

/// Minimal arithmetic expressions for declarative coefficient configs:
/// +, -, *, /, tanh, exp, abs, min, max, numeric constants, variables t/x/y/z.
class Expr {
public:
    Expr() = default;

    static Expr parse(const std::string& text);

    double eval(double t, double x, double y, double z) const;
    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace gsde
