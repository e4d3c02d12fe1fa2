#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairsq/dsl/ast.hpp"
#include "fairsq/dsl/lexer.hpp"

namespace fairsq::dsl {

namespace detail {

// Recursive-descent parser for the task language.
//
// Blocks follow the token grammar (a block is a run of statements), with one
// layout rule on top: a statement that starts a line at or left of the column
// of its enclosing `if` closes that if-chain. This keeps listings written with
// indentation unambiguous when statements follow an if-chain.
class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    SourcePos current_pos() const { return peek().pos; }

    VerificationTask parse_task()
    {
        VerificationTask task;
        task.model = parse_model();
        task.program = parse_program();
        task.spec = parse_spec();
        expect(Tok::End);
        return task;
    }

private:
    const Token& peek(std::size_t ahead = 0) const
    {
        const std::size_t k = idx_ + ahead;
        return k < toks_.size() ? toks_[k] : toks_.back();
    }
    bool at(Tok t) const { return peek().kind == t; }
    const Token& take() { return toks_[idx_ < toks_.size() - 1 ? idx_++ : idx_]; }

    bool accept(Tok t)
    {
        if (!at(t))
            return false;
        take();
        return true;
    }

    [[noreturn]] void fail(std::vector<std::string> expected, std::string message = {}) const
    {
        const Token& t = peek();
        if (message.empty())
            message = t.kind == Tok::End ? "unexpected end of input" : "unexpected " + std::string(describe(t.kind)) + (t.kind == Tok::Ident || t.kind == Tok::Number ? " '" + t.text + "'" : "");
        throw SyntaxError(t.pos, std::move(message), std::move(expected));
    }

    const Token& expect(Tok t)
    {
        if (!at(t))
            fail({std::string(describe(t))});
        return take();
    }

    std::string expect_ident() { return expect(Tok::Ident).text; }

    // `name` must be a contextual keyword spelled as an identifier.
    void expect_word(std::string_view word)
    {
        if (!at(Tok::Ident) || peek().text != word)
            fail({"'" + std::string(word) + "'"});
        take();
    }

    double parse_number()
    {
        double sign = 1.0;
        if (accept(Tok::Minus))
            sign = -1.0;
        else
            accept(Tok::Plus);
        return sign * expect(Tok::Number).number;
    }

    PopulationModel parse_model()
    {
        PopulationModel m;
        m.pos = expect(Tok::Define).pos;
        m.name = expect_ident();
        expect(Tok::LParen);
        if (!at(Tok::RParen))
            fail({"')'"}, "population model must not take parameters");
        expect(Tok::RParen);
        m.body = parse_block(0);
        m.return_pos = expect(Tok::Return).pos;
        m.returns.push_back(expect_ident());
        while (accept(Tok::Comma))
            m.returns.push_back(expect_ident());
        return m;
    }

    DecisionProgram parse_program()
    {
        DecisionProgram p;
        p.pos = expect(Tok::Define).pos;
        p.name = expect_ident();
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            p.params.push_back(expect_ident());
            while (accept(Tok::Comma))
                p.params.push_back(expect_ident());
        }
        expect(Tok::RParen);
        p.body = parse_block(0);
        p.return_pos = expect(Tok::Return).pos;
        p.result = parse_disj();
        return p;
    }

    FairnessSpec parse_spec()
    {
        FairnessSpec s;
        s.pos = expect(Tok::Spec).pos;
        expect(Tok::LBrace);
        expect_word("sensitive");
        expect(Tok::Colon);
        s.sensitive = parse_disj();
        expect(Tok::Semi);
        expect_word("qualified");
        expect(Tok::Colon);
        s.qualified_pos = peek().pos;
        s.qualified = expect_ident();
        expect(Tok::Semi);
        expect_word("epsilon");
        expect(Tok::Colon);
        s.epsilon_pos = peek().pos;
        s.epsilon = parse_number();
        expect(Tok::Semi);
        expect(Tok::RBrace);
        return s;
    }

    Block parse_block(int offside)
    {
        Block block;
        while (at(Tok::Ident) || at(Tok::If)) {
            const Token& t = peek();
            if (t.line_start && t.pos.column <= offside)
                break;
            block.push_back(parse_statement());
        }
        return block;
    }

    Statement parse_statement()
    {
        if (at(Tok::If))
            return parse_if();
        Statement s;
        s.pos = peek().pos;
        std::string target = expect_ident();
        if (accept(Tok::Tilde)) {
            Draw d;
            d.target = std::move(target);
            if (!at(Tok::Ident) || (peek().text != "gauss" && peek().text != "bernoulli"))
                fail({"'gauss'", "'bernoulli'"});
            const std::string dist = take().text;
            expect(Tok::LParen);
            if (dist == "gauss") {
                Gauss g;
                g.mean = parse_number();
                expect(Tok::Comma);
                g.stddev = parse_number();
                d.distribution = g;
            } else {
                d.distribution = Bernoulli{parse_number()};
            }
            expect(Tok::RParen);
            s.node = std::move(d);
            return s;
        }
        if (!accept(Tok::Arrow))
            fail({"'<-'", "'~'"});
        if (at(Tok::True) || at(Tok::False) || at(Tok::LParen)) {
            s.node = AssignCondition{std::move(target), parse_disj()};
            return s;
        }
        const SourcePos value_pos = peek().pos;
        LinearExpression value = parse_linexpr(false);
        if (at_relop()) {
            s.node = AssignCondition{std::move(target), continue_disj(finish_atom(std::move(value), value_pos))};
            return s;
        }
        if ((at(Tok::And) || at(Tok::Or)) && value.as_variable()) {
            s.node = AssignCondition{std::move(target), continue_disj(Condition::of_variable(*value.as_variable(), value_pos))};
            return s;
        }
        s.node = Assign{std::move(target), std::move(value)};
        return s;
    }

    Statement parse_if()
    {
        const DepthGuard guard(*this);
        Statement s;
        const Token& if_tok = expect(Tok::If);
        s.pos = if_tok.pos;
        const int column = if_tok.pos.column;
        IfChain chain;
        chain.branches.push_back(parse_branch(column));
        auto continues = [&] { return !(peek().line_start && peek().pos.column < column); };
        while (at(Tok::Elif) && continues()) {
            take();
            chain.branches.push_back(parse_branch(column));
        }
        if (at(Tok::Else) && continues()) {
            take();
            chain.else_body = parse_block(column);
        }
        s.node = std::move(chain);
        return s;
    }

    Branch parse_branch(int column)
    {
        Branch b;
        expect(Tok::LParen);
        b.guard = parse_disj();
        expect(Tok::RParen);
        b.body = parse_block(column);
        return b;
    }

    bool at_relop() const
    {
        switch (peek().kind) {
        case Tok::Le:
        case Tok::Lt:
        case Tok::Ge:
        case Tok::Gt:
        case Tok::EqEq:
            return true;
        case Tok::Arrow:
            return peek().text == "<-"; // `x <-5` reads as `x < -5`
        default:
            return false;
        }
    }

    Condition parse_disj() { return continue_disj(parse_atom()); }

    Condition continue_disj(Condition first)
    {
        std::vector<Condition> parts;
        parts.push_back(continue_conj(std::move(first)));
        while (accept(Tok::Or))
            parts.push_back(continue_conj(parse_atom()));
        return Condition::combine(Condition::Kind::Or, std::move(parts));
    }

    Condition continue_conj(Condition first)
    {
        std::vector<Condition> parts;
        parts.push_back(std::move(first));
        while (accept(Tok::And))
            parts.push_back(parse_atom());
        return Condition::combine(Condition::Kind::And, std::move(parts));
    }

    Condition parse_atom()
    {
        const SourcePos at_pos = peek().pos;
        if (accept(Tok::LParen)) {
            const DepthGuard guard(*this);
            Condition inner = parse_disj();
            expect(Tok::RParen);
            return inner;
        }
        if (accept(Tok::True))
            return Condition::literal(true, at_pos);
        if (accept(Tok::False))
            return Condition::literal(false, at_pos);
        if (!(at(Tok::Ident) || at(Tok::Number) || at(Tok::Minus) || at(Tok::Plus)))
            fail({"condition"});
        LinearExpression lhs = parse_linexpr(false);
        if (at_relop())
            return finish_atom(std::move(lhs), at_pos);
        if (auto v = lhs.as_variable())
            return Condition::of_variable(*v, at_pos);
        fail({"'<='", "'<'", "'>='", "'>'", "'=='"}, "expected relational operator");
    }

    Condition finish_atom(LinearExpression lhs, SourcePos pos)
    {
        AtomicCondition atom;
        atom.pos = pos;
        bool negate_first = false;
        switch (take().kind) {
        case Tok::Le: atom.relation = Relation::Le; break;
        case Tok::Lt: atom.relation = Relation::Lt; break;
        case Tok::Ge: atom.relation = Relation::Ge; break;
        case Tok::Gt: atom.relation = Relation::Gt; break;
        case Tok::EqEq: atom.relation = Relation::Eq; break;
        case Tok::Arrow:
            atom.relation = Relation::Lt;
            negate_first = true;
            break;
        default: break;
        }
        LinearExpression rhs = parse_linexpr(negate_first);
        atom.lhs = std::move(lhs) - rhs;
        return Condition::of_atom(std::move(atom));
    }

    // linexpr := [sign] term { ("+"|"-") term } ; term := [num "*"] ident | num
    LinearExpression parse_linexpr(bool leading_minus)
    {
        LinearExpression e;
        double sign = leading_minus ? -1.0 : 1.0;
        if (!leading_minus) {
            if (accept(Tok::Minus))
                sign = -1.0;
            else
                accept(Tok::Plus);
        }
        parse_term(e, sign);
        for (;;) {
            if (accept(Tok::Plus))
                parse_term(e, 1.0);
            else if (accept(Tok::Minus))
                parse_term(e, -1.0);
            else
                break;
        }
        return e;
    }

    void parse_term(LinearExpression& e, double sign)
    {
        if (at(Tok::Number)) {
            const double value = take().number;
            if (accept(Tok::Star)) {
                if (at(Tok::Number))
                    fail({"identifier"}, "product of constants is not supported");
                const std::string name = expect_ident();
                if (at(Tok::Star))
                    fail({}, "nonlinear term");
                e.add_term(name, sign * value);
            } else {
                e.add_constant(sign * value);
            }
            return;
        }
        if (at(Tok::Ident)) {
            const std::string name = take().text;
            if (at(Tok::Star))
                fail({}, "nonlinear term");
            e.add_term(name, sign);
            return;
        }
        fail({"identifier", "number"});
    }

    static constexpr int max_depth = 200;

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : parser(p)
        {
            if (++parser.depth_ > max_depth)
                throw SyntaxError(parser.current_pos(), "nesting too deep");
        }
        ~DepthGuard() { --parser.depth_; }
        DepthGuard(const DepthGuard&) = delete;
        DepthGuard& operator=(const DepthGuard&) = delete;
        Parser& parser;
    };

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
    int depth_ = 0;
};

} // namespace detail

// Parses a complete task (population model, decision program, spec block).
// Throws SyntaxError with the offending position; never returns a partial task.
inline VerificationTask parse_source(std::string_view text)
{
    detail::Parser parser(tokenize(text));
    try {
        return parser.parse_task();
    } catch (const std::domain_error& e) {
        // coefficient arithmetic overflowed to infinity
        throw SyntaxError(parser.current_pos(), e.what());
    }
}

} // namespace fairsq::dsl
