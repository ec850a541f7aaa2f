// Writes a synthetic bipartite planted-partition phenotype-gene graph in the
// genes_to_phenotype column layout.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phenolink/random.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic phenotype-gene association generator"};
    std::string out = "toy_associations.tsv";
    std::size_t phenotypes = 200, genes = 400, communities = 10;
    double p_in = 0.34, p_out = 0.004;
    std::uint64_t seed = 20240607;
    app.add_option("-o,--out", out)->capture_default_str();
    app.add_option("--phenotypes", phenotypes)->capture_default_str();
    app.add_option("--genes", genes)->capture_default_str();
    app.add_option("--communities", communities)->capture_default_str();
    app.add_option("--p-in", p_in, "edge probability inside a community")->capture_default_str();
    app.add_option("--p-out", p_out, "edge probability across communities")->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    phenolink::Rng rng(seed);
    std::vector<std::size_t> hpo_block(phenotypes), gene_block(genes);
    for (std::size_t i = 0; i < phenotypes; ++i) hpo_block[i] = i % communities;
    for (std::size_t j = 0; j < genes; ++j) gene_block[j] = j % communities;

    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < phenotypes; ++i) {
        for (std::size_t j = 0; j < genes; ++j) {
            const double p = hpo_block[i] == gene_block[j] ? p_in : p_out;
            if (phenolink::uniform01(rng) < p) edges.emplace(i, j);
        }
    }
    // no isolated nodes: attach any leftover to a random partner in its block
    std::vector<std::size_t> hpo_deg(phenotypes), gene_deg(genes);
    for (const auto& [i, j] : edges) {
        ++hpo_deg[i];
        ++gene_deg[j];
    }
    for (std::size_t i = 0; i < phenotypes; ++i) {
        if (hpo_deg[i]) continue;
        std::size_t j;
        do {
            j = phenolink::uniform_index(rng, genes);
        } while (gene_block[j] != hpo_block[i]);
        edges.emplace(i, j);
        ++gene_deg[j];
    }
    for (std::size_t j = 0; j < genes; ++j) {
        if (gene_deg[j]) continue;
        std::size_t i;
        do {
            i = phenolink::uniform_index(rng, phenotypes);
        } while (hpo_block[i] != gene_block[j]);
        edges.emplace(i, j);
    }

    std::ofstream os(out);
    if (!os) {
        std::cerr << "cannot write " << out << '\n';
        return 1;
    }
    os << "ncbi_gene_id\tgene_symbol\thpo_id\thpo_name\n";
    char hpo[16];
    for (const auto& [i, j] : edges) {
        std::snprintf(hpo, sizeof hpo, "HP:%07zu", 9000000 + i);
        os << 900000 + j << "\tTG" << j << '\t' << hpo << "\tsynthetic phenotype " << i << " (block "
           << hpo_block[i] << ")\n";
    }
    std::cerr << edges.size() << " associations, " << phenotypes << " phenotypes, " << genes << " genes\n";
    return 0;
}
