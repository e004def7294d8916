def search():
    messages = ''
    relationship, msg = find_relationship(entity1_aliases = ['Li Ronghao'], entity2_aliases = ['Li Bai'])
    messages += msg
    return messages
