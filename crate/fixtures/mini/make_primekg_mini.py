#!/usr/bin/env python3
"""Writes primekg_mini.csv, a small graph in the PrimeKG kg.csv layout.

Deterministic (fixed seed, stdlib only). Every node except the decoys sits
within two hops of the Alzheimer disease node; a pathway layer hangs three
hops out and a two-disease island is disconnected, so subgraph extraction
has something to cut. Nodes fall into four modules and most random links
stay inside a module, which gives link prediction something to learn.
Every edge is listed in both directions, as in the published file.
"""

import csv
import random
from pathlib import Path

OUT = Path(__file__).with_name("primekg_mini.csv")
rng = random.Random(20240607)
MODULES = 4
IN_MODULE = 0.85

AD = ("4975", "disease", "Alzheimer disease", "MONDO")

AD_GENES = [
    ("348", "APOE"), ("54209", "TREM2"), ("945", "CD33"), ("1191", "CLU"), ("274", "BIN1"),
    ("1378", "CR1"), ("6653", "SORL1"), ("23607", "CD2AP"), ("2041", "EPHA1"), ("3635", "INPP5D"),
    ("81858", "SHARPIN"), ("51225", "ABI3"), ("5336", "PLCG2"), ("8301", "PICALM"), ("730", "C7"),
    ("6688", "SPI1"), ("2185", "PTK2B"),
]
CORE_GENES = [
    ("4069", "LYZ"), ("3553", "IL1B"), ("7124", "TNF"), ("627", "BDNF"), ("3569", "IL6"),
    ("1401", "CRP"), ("351", "APP"), ("5663", "PSEN1"), ("5664", "PSEN2"), ("4137", "MAPT"),
]
OTHER_GENES = [
    ("2896", "GRN"), ("6622", "SNCA"), ("120892", "LRRK2"), ("2629", "GBA1"), ("6647", "SOD1"),
    ("23435", "TARDBP"), ("3064", "HTT"), ("5621", "PRNP"), ("1636", "ACE"), ("10347", "ABCA7"),
    ("64231", "MS4A6A"), ("4208", "MEF2C"), ("57091", "CASS4"), ("10979", "FERMT2"), ("123041", "SLC24A4"),
    ("51314", "NME8"), ("1829", "DSG2"), ("10658", "CELF1"), ("3123", "HLA-DRB1"), ("102", "ADAM10"),
    ("23621", "BACE1"), ("2932", "GSK3B"), ("1020", "CDK5"), ("7305", "TYROBP"), ("1436", "CSF1R"),
    ("1524", "CX3CR1"), ("3586", "IL10"), ("4790", "NFKB1"), ("7099", "TLR4"), ("114548", "NLRP3"),
    ("361", "AQP4"), ("4035", "LRP1"), ("7422", "VEGFA"), ("3630", "INS"), ("5468", "PPARG"),
    ("1813", "DRD2"), ("6531", "SLC6A3"), ("3156", "HMGCR"),
]
DISEASES = [
    ("1627", "dementia"), ("5148", "type 2 diabetes mellitus"), ("5044", "hypertensive disorder"),
    ("2050", "depressive disorder"), ("11122", "obesity disorder"), ("5098", "stroke disorder"),
    ("4995", "cardiovascular disorder"), ("4979", "asthma"), ("5559", "neurodegenerative disease"),
    ("5180", "Parkinson disease"), ("4976", "amyotrophic lateral sclerosis"), ("7739", "Huntington disease"),
    ("17276", "frontotemporal dementia"), ("4838", "vascular dementia"), ("16587", "Lewy body dementia"),
    ("5090", "schizophrenia"), ("4985", "bipolar disorder"), ("5061", "atherosclerosis"),
    ("5147", "type 1 diabetes mellitus"), ("5240", "kidney failure"), ("5263", "coronary artery disease"),
    ("8383", "rheumatoid arthritis"), ("7915", "systemic lupus erythematosus"), ("5301", "multiple sclerosis"),
    ("4975001", "early-onset Alzheimer disease"), ("11561", "Down syndrome"), ("5027", "epilepsy"),
    ("5071", "sleep apnea"), ("8170", "osteoporosis"),
]
UMLS_DISEASE = ("C0234985", "cognitive decline", "UMLS")
DRUGS = [
    ("DB00843", "Donepezil"), ("DB00331", "Metformin"), ("DB01043", "Memantine"), ("DB00674", "Galantamine"),
    ("DB00989", "Rivastigmine"), ("DB01076", "Atorvastatin"), ("DB00641", "Simvastatin"), ("DB00722", "Lisinopril"),
    ("DB00381", "Amlodipine"), ("DB01104", "Sertraline"), ("DB00472", "Fluoxetine"), ("DB00215", "Citalopram"),
    ("DB00030", "Insulin human"), ("DB00945", "Acetylsalicylic acid"), ("DB01050", "Ibuprofen"),
    ("DB00788", "Naproxen"), ("DB01235", "Levodopa"), ("DB00740", "Riluzole"), ("DB00502", "Haloperidol"),
    ("DB00734", "Risperidone"), ("DB01224", "Quetiapine"), ("DB01356", "Lithium cation"),
    ("DB00313", "Valproic acid"), ("DB00996", "Gabapentin"), ("DB01065", "Melatonin"), ("DB00163", "Vitamin E"),
    ("DB00635", "Prednisone"), ("DB00005", "Etanercept"), ("DB00051", "Adalimumab"), ("DB00741", "Hydrocortisone"),
]
EFFECTS = [
    "memory impairment", "confusion", "agitation", "insomnia", "nausea", "dizziness", "headache",
    "weight gain", "weight loss", "fatigue", "tremor", "apathy", "hallucinations", "depressed mood",
    "anxiety", "bradycardia", "hypotension", "edema", "seizure", "ataxia", "aphasia", "disorientation",
    "gait disturbance", "urinary incontinence", "dysphagia", "irritability", "delusions", "somnolence",
    "muscle rigidity", "visual hallucinations",
]
ANATOMY = [
    "hippocampus", "entorhinal cortex", "prefrontal cortex", "cerebellum", "amygdala", "thalamus",
    "hypothalamus", "striatum", "substantia nigra", "temporal lobe", "parietal lobe", "occipital lobe",
    "frontal lobe", "corpus callosum", "brainstem", "spinal cord", "liver", "kidney", "heart", "lung",
    "spleen", "blood", "adipose tissue", "skeletal muscle", "pancreas",
]
PROCESSES = [
    "amyloid-beta clearance", "microglial cell activation", "synaptic transmission", "inflammatory response",
    "lipid transport", "endocytosis", "phagocytosis", "apoptotic process", "cholesterol homeostasis",
    "tau protein binding", "axon guidance", "neuron projection development", "complement activation",
    "cytokine production", "glucose homeostasis", "response to oxidative stress", "autophagy",
    "long-term synaptic potentiation", "regulation of insulin secretion", "T cell activation",
    "innate immune response", "learning or memory", "protein ubiquitination", "mitochondrion organization",
    "blood-brain barrier maintenance",
]
PATHWAYS = ["Neuronal System", "Immune System", "Metabolism of lipids", "Signal Transduction", "Hemostasis"]
ISLAND = [("90001", "island disease alpha"), ("90002", "island disease beta")]

DISPLAY = {
    "anatomy_protein_present": "expression present",
    "indication": "indication",
    "disease_phenotype_positive": "phenotype present",
    "disease_protein": "associated with",
    "drug_effect": "side effect",
    "bioprocess_protein": "interacts with",
    "drug_protein": "target",
    "protein_protein": "ppi",
    "disease_disease": "parent-child",
    "anatomy_anatomy": "parent-child",
    "pathway_protein": "interacts with",
    "bioprocess_bioprocess": "parent-child",
    "pathway_pathway": "parent-child",
}


def main():
    genes = [(i, "gene/protein", n, "NCBI") for i, n in AD_GENES + CORE_GENES + OTHER_GENES]
    near_genes = genes[: len(AD_GENES) + len(CORE_GENES)]
    far_genes = genes[len(near_genes):]
    diseases = [(i, "disease", n, "MONDO") for i, n in DISEASES]
    umls_disease = (UMLS_DISEASE[0], "disease", UMLS_DISEASE[1], UMLS_DISEASE[2])
    drugs = [(i, "drug", n, "DrugBank") for i, n in DRUGS]
    effects = [(str(2000 + k), "effect/phenotype", n, "HPO") for k, n in enumerate(EFFECTS)]
    anatomy = [(str(1000 + k), "anatomy", n, "UBERON") for k, n in enumerate(ANATOMY)]
    processes = [(str(6000 + k), "biological_process", n, "GO") for k, n in enumerate(PROCESSES)]
    pathways = [(f"R-HSA-{100 + k}", "pathway", n, "REACTOME") for k, n in enumerate(PATHWAYS)]
    island = [(i, "disease", n, "MONDO") for i, n in ISLAND]

    module = {}
    for group in (genes, diseases, [umls_disease], drugs, effects, anatomy, processes):
        for k, node in enumerate(group):
            module[node] = k % MODULES

    edges = set()

    def link(rel, x, y):
        edges.add((rel, x, y))
        edges.add((rel, y, x))

    def pick(source, targets, count):
        same = [t for t in targets if module[t] == module[source]]
        chosen = []
        while len(chosen) < count:
            t = rng.choice(same if rng.random() < IN_MODULE else targets)
            if t not in chosen and t != source:
                chosen.append(t)
        return chosen

    def spread(rel, sources, targets, per_source):
        for s in sources:
            for t in pick(s, targets, per_source):
                link(rel, s, t)

    # hop 1 from AD
    for g in near_genes:
        link("disease_protein", AD, g)
    for d in diseases + [umls_disease]:
        link("disease_disease", AD, d)
    for e in rng.sample(effects, 5):
        link("disease_phenotype_positive", AD, e)
    for d in rng.sample(drugs, 8):
        link("indication", d, AD)

    # hop 2; every far gene gets a disease so it stays in the ball
    for g in far_genes:
        for d in pick(g, diseases, 2):
            link("disease_protein", d, g)
    spread("disease_phenotype_positive", diseases + [umls_disease], effects, 3)
    spread("indication", drugs, diseases, 2)
    spread("drug_effect", drugs, effects, 3)
    spread("drug_protein", drugs, genes, 2)
    for k, a in enumerate(anatomy):
        link("anatomy_protein_present", a, near_genes[k % len(near_genes)])
    spread("anatomy_protein_present", genes, anatomy, 2)
    for k, p in enumerate(processes):
        link("bioprocess_protein", p, near_genes[(3 * k + 1) % len(near_genes)])
    spread("bioprocess_protein", genes, processes, 2)

    by_symbol = {g[2]: g for g in genes}
    with open(Path(__file__).with_name("validated_gene_edges.tsv")) as f:
        next(f)
        for line in f:
            a, b, _ = line.rstrip("\n").split("\t")
            link("protein_protein", by_symbol[a], by_symbol[b])
    for _ in range(60):
        a = rng.choice(genes)
        link("protein_protein", a, pick(a, genes, 1)[0])

    # structure the filter removes: untyped pairs, three-hop pathways, an island
    for _ in range(10):
        a, b = rng.sample(anatomy, 2)
        link("anatomy_anatomy", a, b)
    for _ in range(8):
        a, b = rng.sample(processes, 2)
        link("bioprocess_bioprocess", a, b)
    for k, pw in enumerate(pathways):
        link("pathway_protein", pw, far_genes[k])
        link("pathway_pathway", pw, pathways[(k + 1) % len(pathways)])
    link("disease_disease", island[0], island[1])

    index = {}
    for node in sorted({n for e in edges for n in e[1:]}):
        index[node] = len(index)

    with open(OUT, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["relation", "display_relation", "x_index", "x_id", "x_type", "x_name", "x_source",
                    "y_index", "y_id", "y_type", "y_name", "y_source"])
        for rel, x, y in sorted(edges):
            w.writerow([rel, DISPLAY[rel], index[x], *x, index[y], *y])


if __name__ == "__main__":
    main()
