#include <stdio.h>
#include <string.h>

enum kind { K_IDENT, K_NUMBER, K_STRING, K_OP, K_LPAREN, K_RPAREN, K_SEMI, K_END, K_ERROR };

static const char *kind_names[] = {"ident", "number", "string", "op", "lparen", "rparen", "semi", "end", "error"};

struct token {
  enum kind kind;
  int start;
  int len;
};

static int is_ident(int c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

static struct token next_token(const char *s, int *pos) {
  while (s[*pos] == ' ' || s[*pos] == '\n' || s[*pos] == '\t') (*pos)++;
  struct token t = {K_END, *pos, 0};
  int c = s[*pos];
  switch (c) {
    case 0: return t;
    case '(': t.kind = K_LPAREN; t.len = 1; break;
    case ')': t.kind = K_RPAREN; t.len = 1; break;
    case ';': t.kind = K_SEMI; t.len = 1; break;
    case '+': case '-': case '*': case '/': case '=': case '<': case '>': case '!':
      t.kind = K_OP;
      t.len = (s[*pos + 1] == '=') ? 2 : 1;
      break;
    case '"': {
      int i = *pos + 1;
      while (s[i] && s[i] != '"') i++;
      t.kind = s[i] ? K_STRING : K_ERROR;
      t.len = i - *pos + (s[i] ? 1 : 0);
      break;
    }
    case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': case '8': case '9': {
      int i = *pos;
      while (s[i] >= '0' && s[i] <= '9') i++;
      t.kind = K_NUMBER;
      t.len = i - *pos;
      break;
    }
    default:
      if (is_ident(c)) {
        int i = *pos;
        while (is_ident(s[i]) || (s[i] >= '0' && s[i] <= '9')) i++;
        t.kind = K_IDENT;
        t.len = i - *pos;
      } else {
        t.kind = K_ERROR;
        t.len = 1;
      }
  }
  *pos += t.len;
  return t;
}

int main(int argc, char **argv) {
  const char *src = argc > 1 ? argv[1] : "x = (alpha + 42) * beta_2; print(\"hi there\"); y != 7 # z";
  int pos = 0;
  int counts[9] = {0};
  for (;;) {
    struct token t = next_token(src, &pos);
    counts[t.kind]++;
    if (t.kind == K_END) break;
    printf("%-7s '%.*s'\n", kind_names[t.kind], t.len, src + t.start);
  }
  for (int k = 0; k < 9; ++k)
    if (counts[k]) printf("%s=%d ", kind_names[k], counts[k]);
  printf("\n");
  return 0;
}
