#include "layoutc/lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace layoutc {

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  bool eof() const { return pos >= text.size(); }
  char peek(size_t off = 0) const {
    return pos + off < text.size() ? text[pos + off] : '\0';
  }
  char advance() {
    char c = text[pos++];
    if (c == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    return c;
  }
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

LexResult lex(const std::string& text, int file_id) {
  LexResult out;
  Cursor c{text};

  auto span_from = [&](int line, int col) {
    Span s;
    s.file_id = file_id;
    s.line = line;
    s.col = col;
    s.end_line = c.line;
    s.end_col = c.col;
    return s;
  };
  auto push = [&](Tok k, int line, int col, std::string txt = "") {
    Token t;
    t.kind = k;
    t.text = std::move(txt);
    t.span = span_from(line, col);
    out.tokens.push_back(std::move(t));
    return &out.tokens.back();
  };

  while (!c.eof()) {
    char ch = c.peek();
    int line = c.line, col = c.col;

    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      c.advance();
      continue;
    }
    if (ch == '/' && c.peek(1) == '/') {
      while (!c.eof() && c.peek() != '\n') c.advance();
      continue;
    }
    if (ch == '/' && c.peek(1) == '*') {
      c.advance();
      c.advance();
      while (!c.eof() && !(c.peek() == '*' && c.peek(1) == '/')) c.advance();
      if (!c.eof()) {
        c.advance();
        c.advance();
      }
      continue;
    }

    if (is_ident_start(ch)) {
      std::string id;
      while (!c.eof() && is_ident_char(c.peek())) id += c.advance();
      if (id == "_") {
        push(Tok::Underscore, line, col, id);
      } else {
        push(Tok::Ident, line, col, id);
      }
      continue;
    }

    if (std::isdigit(static_cast<unsigned char>(ch))) {
      // Binary literal spellings: 0b'101, 0'b101, 0b101.
      if (ch == '0' &&
          ((c.peek(1) == 'b' && (c.peek(2) == '\'' || c.peek(2) == '0' || c.peek(2) == '1')) ||
           (c.peek(1) == '\'' && c.peek(2) == 'b'))) {
        c.advance();  // 0
        if (c.peek() == '\'') c.advance();
        c.advance();  // b
        if (c.peek() == '\'') c.advance();
        uint64_t v = 0;
        bool any = false;
        while (c.peek() == '0' || c.peek() == '1') {
          v = (v << 1) | static_cast<uint64_t>(c.advance() - '0');
          any = true;
        }
        Token* t = push(Tok::Int, line, col);
        t->int_val = v;
        while (!c.eof() && is_ident_char(c.peek())) t->suffix += c.advance();
        if (!any) {
          Diagnostic d;
          d.code = DiagCode::SyntaxError;
          d.span = t->span;
          d.message = "empty binary literal";
          out.diags.push_back(d);
        }
        continue;
      }
      std::string num;
      bool is_float = false;
      while (std::isdigit(static_cast<unsigned char>(c.peek()))) num += c.advance();
      if (c.peek() == '.' && std::isdigit(static_cast<unsigned char>(c.peek(1)))) {
        is_float = true;
        num += c.advance();
        while (std::isdigit(static_cast<unsigned char>(c.peek()))) num += c.advance();
        if ((c.peek() == 'e' || c.peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(c.peek(1))) ||
             ((c.peek(1) == '+' || c.peek(1) == '-') &&
              std::isdigit(static_cast<unsigned char>(c.peek(2)))))) {
          num += c.advance();
          if (c.peek() == '+' || c.peek() == '-') num += c.advance();
          while (std::isdigit(static_cast<unsigned char>(c.peek()))) num += c.advance();
        }
      }
      Token* t;
      if (is_float) {
        t = push(Tok::Float, line, col, num);
        t->float_val = std::strtod(num.c_str(), nullptr);
      } else {
        t = push(Tok::Int, line, col, num);
        t->int_val = std::strtoull(num.c_str(), nullptr, 10);
      }
      // Suffix: u, u16, i8, f32 ... (an identifier glued to the number).
      if (is_ident_start(c.peek())) {
        while (!c.eof() && is_ident_char(c.peek())) t->suffix += c.advance();
      }
      continue;
    }

    // --- separator (exactly three dashes)
    if (ch == '-' && c.peek(1) == '-' && c.peek(2) == '-') {
      c.advance();
      c.advance();
      c.advance();
      push(Tok::Separator, line, col, "---");
      continue;
    }

    auto two = [&](char a, char b) { return ch == a && c.peek(1) == b; };
    if (two('-', '>')) { c.advance(); c.advance(); push(Tok::Arrow, line, col, "->"); continue; }
    if (two('&', '&')) { c.advance(); c.advance(); push(Tok::AmpAmp, line, col, "&&"); continue; }
    if (two('|', '|')) { c.advance(); c.advance(); push(Tok::PipePipe, line, col, "||"); continue; }
    if (two('=', '=')) { c.advance(); c.advance(); push(Tok::Eq, line, col, "=="); continue; }
    if (two('!', '=')) { c.advance(); c.advance(); push(Tok::Ne, line, col, "!="); continue; }
    if (two('<', '=')) { c.advance(); c.advance(); push(Tok::Le, line, col, "<="); continue; }
    if (two('>', '=')) { c.advance(); c.advance(); push(Tok::Ge, line, col, ">="); continue; }
    if (two('<', '<')) { c.advance(); c.advance(); push(Tok::Shl, line, col, "<<"); continue; }
    if (two('>', '>')) { c.advance(); c.advance(); push(Tok::Shr, line, col, ">>"); continue; }

    c.advance();
    switch (ch) {
      case '(': push(Tok::LParen, line, col, "("); break;
      case ')': push(Tok::RParen, line, col, ")"); break;
      case '{': push(Tok::LBrace, line, col, "{"); break;
      case '}': push(Tok::RBrace, line, col, "}"); break;
      case '[': push(Tok::LBracket, line, col, "["); break;
      case ']': push(Tok::RBracket, line, col, "]"); break;
      case ',': push(Tok::Comma, line, col, ","); break;
      case ';': push(Tok::Semi, line, col, ";"); break;
      case ':': push(Tok::Colon, line, col, ":"); break;
      case '.': push(Tok::Dot, line, col, "."); break;
      case '|': push(Tok::Pipe, line, col, "|"); break;
      case '=': push(Tok::Assign, line, col, "="); break;
      case '+': push(Tok::Plus, line, col, "+"); break;
      case '-': push(Tok::Minus, line, col, "-"); break;
      case '*': push(Tok::Star, line, col, "*"); break;
      case '/': push(Tok::Slash, line, col, "/"); break;
      case '%': push(Tok::Percent, line, col, "%"); break;
      case '&': push(Tok::Amp, line, col, "&"); break;
      case '^': push(Tok::Caret, line, col, "^"); break;
      case '!': push(Tok::Not, line, col, "!"); break;
      case '~': push(Tok::Tilde, line, col, "~"); break;
      case '<': push(Tok::Lt, line, col, "<"); break;
      case '>': push(Tok::Gt, line, col, ">"); break;
      default: {
        Diagnostic d;
        d.code = DiagCode::SyntaxError;
        d.span.file_id = file_id;
        d.span.line = line;
        d.span.col = col;
        d.span.end_line = line;
        d.span.end_col = col + 1;
        d.message = std::string("unexpected character '") + ch + "'";
        out.diags.push_back(d);
        break;
      }
    }
  }

  Token end;
  end.kind = Tok::End;
  end.span.file_id = file_id;
  end.span.line = c.line;
  end.span.col = c.col;
  end.span.end_line = c.line;
  end.span.end_col = c.col;
  out.tokens.push_back(end);
  return out;
}

}  // namespace layoutc
