#include <stdio.h>
#include <stdlib.h>

#define NODES 10

struct node;
struct edge {
  struct node *to;
  int weight;
};
struct node {
  const char *name;
  int degree;
  struct edge edges[4];
};

static struct node nodes[NODES];
static const char *names[NODES] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
static struct node *order[NODES];
static struct node **order_end = order + NODES;
static int dist[NODES];

static void connect(int a, int b, int w) {
  struct node *n = &nodes[a];
  n->edges[n->degree].to = &nodes[b];
  n->edges[n->degree].weight = w;
  n->degree++;
}

static void relax_all(void) {
  for (int round = 0; round < NODES; ++round)
    for (int i = 0; i < NODES; ++i)
      for (int k = 0; k < nodes[i].degree; ++k) {
        int j = (int)(nodes[i].edges[k].to - nodes);
        if (dist[i] + nodes[i].edges[k].weight < dist[j]) dist[j] = dist[i] + nodes[i].edges[k].weight;
      }
}

static int cmp(const void *a, const void *b) {
  int x = dist[*(struct node *const *)a - nodes], y = dist[*(struct node *const *)b - nodes];
  return x - y;
}

int main(int argc, char **argv) {
  int src = argc > 1 ? atoi(argv[1]) % NODES : 0;
  for (int i = 0; i < NODES; ++i) {
    nodes[i].name = names[i];
    dist[i] = 1 << 28;
    order[i] = &nodes[i];
  }
  for (int i = 0; i < NODES; ++i) {
    connect(i, (i + 1) % NODES, 3 + i % 4);
    connect(i, (i * 3 + 2) % NODES, 7 + (i * 5) % 6);
  }
  dist[src] = 0;
  relax_all();
  qsort(order, (size_t)(order_end - order), sizeof order[0], cmp);
  for (struct node **p = order; p < order_end; ++p) printf("%s:%d ", (*p)->name, dist[*p - nodes]);
  printf("\n");
  return 0;
}
