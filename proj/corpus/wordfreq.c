#include <ctype.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define BUCKETS 31

struct entry {
  char *word;
  int count;
  struct entry *next;
};

static struct entry *table[BUCKETS];

static const char *default_text =
    "the quick brown fox jumps over the lazy dog the dog barks and the fox runs "
    "a lazy afternoon for a quick fox is a rare thing indeed said the dog";

static unsigned hash(const char *s) {
  unsigned h = 5381;
  while (*s) h = h * 33 + (unsigned char)*s++;
  return h % BUCKETS;
}

static void add_word(const char *w) {
  unsigned h = hash(w);
  for (struct entry *e = table[h]; e; e = e->next)
    if (strcmp(e->word, w) == 0) {
      e->count++;
      return;
    }
  struct entry *e = malloc(sizeof *e);
  e->word = strdup(w);
  e->count = 1;
  e->next = table[h];
  table[h] = e;
}

static int cmp_entries(const void *a, const void *b) {
  const struct entry *x = *(const struct entry *const *)a, *y = *(const struct entry *const *)b;
  if (x->count != y->count) return y->count - x->count;
  return strcmp(x->word, y->word);
}

int main(int argc, char **argv) {
  const char *text = argc > 1 ? argv[1] : default_text;
  char buf[64];
  size_t n = 0;
  for (const char *p = text;; ++p) {
    if (isalpha((unsigned char)*p) && n < sizeof buf - 1) {
      buf[n++] = (char)tolower((unsigned char)*p);
    } else {
      if (n) {
        buf[n] = 0;
        add_word(buf);
        n = 0;
      }
      if (!*p) break;
    }
  }
  struct entry *all[256];
  size_t total = 0;
  for (int b = 0; b < BUCKETS; ++b)
    for (struct entry *e = table[b]; e && total < 256; e = e->next) all[total++] = e;
  qsort(all, total, sizeof all[0], cmp_entries);
  for (size_t i = 0; i < total && i < 10; ++i) printf("%3d %s\n", all[i]->count, all[i]->word);
  printf("distinct %zu\n", total);
  return 0;
}
